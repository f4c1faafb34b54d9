#include "hdrvqa/config.h"

#include <filesystem>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hdrvqa/csv.h"
#include "hdrvqa/error.h"

#ifndef HDRVQA_DATA_DIR
#define HDRVQA_DATA_DIR "data"
#endif

namespace hdrvqa {

namespace {

struct KeyDoc {
  const char* key;
  const char* fallback;
  const char* help;
};

constexpr KeyDoc kKeys[] = {
    {"nss.mscn_c", "0.00392156862745098", "MSCN stabilizing constant (1/255)"},
    {"niqe.model", "<bundled>", "pristine NIQE model (JSON)"},
    {"patchmax.patch_size", "20", "patch side P in pixels"},
    {"patchmax.percentile", "10", "contrast percentile T"},
    {"patchmax.layout", "full", "full (216 features) or summary (108)"},
    {"hdrmax.window", "20", "rescaling window side"},
    {"hdrmax.stride", "10", "rescaling cell side"},
    {"hdrmax.delta", "4", "nonlinearity strength"},
    {"stchips.temporal_a", "0.5", "temporal bandpass decay a"},
    {"regressor.n_estimators", "50,100,200", "tree counts searched by CV"},
    {"regressor.max_features", "sqrt,one_third,all", "feature subsampling modes searched by CV"},
    {"regressor.folds", "5", "CV folds"},
    {"regressor.min_samples_leaf", "2", "minimum samples per leaf"},
    {"regressor.train_ratio", "0.8", "train share of videos per split"},
    {"regressor.trials", "100", "random train/test splits"},
};

int to_int(const std::string& key, const std::string& v) {
  try {
    return static_cast<int>(parse_long(v, key));
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v, key);
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& s : split_csv_line(v)) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

}  // namespace

void ToolConfig::set(const std::string& key, const std::string& value) {
  if (key == "nss.mscn_c") {
    mscn_c = to_double(key, value);
  } else if (key == "niqe.model") {
    niqe_model = value;
  } else if (key == "patchmax.patch_size") {
    patchmax.patch_size = to_int(key, value);
  } else if (key == "patchmax.percentile") {
    patchmax.percentile = to_double(key, value);
  } else if (key == "patchmax.layout") {
    if (value == "full") {
      patchmax.layout = PatchMaxLayout::kFull;
    } else if (value == "summary") {
      patchmax.layout = PatchMaxLayout::kSummary;
    } else {
      throw UsageError(fmt::format("patchmax.layout must be full or summary, got '{}'", value));
    }
  } else if (key == "hdrmax.window") {
    hdrmax.window = to_int(key, value);
  } else if (key == "hdrmax.stride") {
    hdrmax.stride = to_int(key, value);
  } else if (key == "hdrmax.delta") {
    hdrmax.delta = to_double(key, value);
  } else if (key == "stchips.temporal_a") {
    stchips.temporal_a = to_double(key, value);
  } else if (key == "regressor.n_estimators") {
    regressor.grid.n_estimators.clear();
    for (const auto& s : to_list(value)) regressor.grid.n_estimators.push_back(to_int(key, s));
  } else if (key == "regressor.max_features") {
    regressor.grid.max_features.clear();
    for (const auto& s : to_list(value)) regressor.grid.max_features.push_back(parse_max_features(s));
  } else if (key == "regressor.folds") {
    regressor.grid.folds = to_int(key, value);
  } else if (key == "regressor.min_samples_leaf") {
    regressor.grid.min_samples_leaf = to_int(key, value);
  } else if (key == "regressor.train_ratio") {
    regressor.train_ratio = to_double(key, value);
  } else if (key == "regressor.trials") {
    regressor.trials = to_int(key, value);
  } else {
    throw UsageError(fmt::format("unknown config key '{}'", key));
  }
}

void ToolConfig::load(const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError(fmt::format("cannot read config '{}': {}", path, e.what()));
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() != 1) {
      throw UsageError(fmt::format("{}: key '{}' must sit inside a section", path, item.name));
    }
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      if (i) value += ',';
      value += item.inputs[i];
    }
    set(item.parents[0] + "." + item.name, value);
  }
}

void ToolConfig::finalize() {
  if (!(mscn_c > 0)) throw UsageError("nss.mscn_c must be positive");
  patchmax.mscn_c = mscn_c;
  hdrmax.mscn_c = mscn_c;
  stchips.mscn_c = mscn_c;
  patchmax.validate();
  hdrmax.validate();
  stchips.validate();
  const auto& g = regressor.grid;
  if (g.n_estimators.empty() || g.max_features.empty()) throw UsageError("regressor grid is empty");
  for (int n : g.n_estimators) {
    if (n < 1) throw UsageError("regressor.n_estimators entries must be positive");
  }
  if (g.folds < 2) throw UsageError("regressor.folds must be at least 2");
  if (g.min_samples_leaf < 1) throw UsageError("regressor.min_samples_leaf must be at least 1");
  if (!(regressor.train_ratio > 0 && regressor.train_ratio < 1)) {
    throw UsageError("regressor.train_ratio must lie in (0, 1)");
  }
  if (regressor.trials < 1) throw UsageError("regressor.trials must be positive");
}

std::string config_reference() {
  std::string out = "Config keys (INI sections; --set section.key=value overrides):\n";
  for (const auto& k : kKeys) out += fmt::format("  {:<26} = {:<20} {}\n", k.key, k.fallback, k.help);
  return out;
}

std::string bundled_niqe_model_path() {
  return (std::filesystem::path(HDRVQA_DATA_DIR) / "niqe_pristine.json").string();
}

}  // namespace hdrvqa
