#include "hdrvqa/feature_layout.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hdrvqa/csv.h"
#include "hdrvqa/error.h"

namespace hdrvqa {

const std::vector<std::string>& nss_statistic_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"ggd_alpha", "ggd_sigma2"};
    for (const char* o : {"h", "v", "d1", "d2"}) {
      for (const char* s : {"eta", "nu", "sigma_l2", "sigma_r2"}) n.push_back(fmt::format("{}_{}", o, s));
    }
    return n;
  }();
  return names;
}

const FeatureBank& FeatureSchema::bank(const std::string& name) const {
  for (const auto& b : banks) {
    if (b.name == name) return b;
  }
  throw UsageError(fmt::format("layout {} has no bank '{}'", version, name));
}

std::string layout_for(PatchMaxLayout layout) {
  return layout == PatchMaxLayout::kFull ? kLayoutFull : kLayoutSummary;
}

PatchMaxLayout patchmax_layout_of(const std::string& version) {
  const std::string base = version.substr(0, version.find('+'));
  if (base == kLayoutFull) return PatchMaxLayout::kFull;
  if (base == kLayoutSummary) return PatchMaxLayout::kSummary;
  throw LayoutMismatchError(fmt::format("unknown feature layout '{}'", version));
}

FeatureSchema schema_for(const std::string& version) {
  std::string base = version;
  bool tv = false;
  if (const auto plus = version.find('+'); plus != std::string::npos) {
    if (version.substr(plus) != "+tv") {
      throw LayoutMismatchError(fmt::format("unknown feature layout '{}'", version));
    }
    base = version.substr(0, plus);
    tv = true;
  }
  const PatchMaxLayout pm = patchmax_layout_of(base);
  FeatureSchema s;
  s.version = version;
  const auto& stats = nss_statistic_names();
  auto open = [&](const std::string& bank) { s.banks.push_back({bank, s.names.size(), 0}); };
  auto close = [&] { s.banks.back().end = s.names.size(); };

  open("niqe");
  for (int scale = 1; scale <= 2; ++scale) {
    for (const auto& st : stats) s.names.push_back(fmt::format("niqe.s{}.{}", scale, st));
  }
  s.names.push_back("niqe.distance");
  close();

  open("patchmax");
  std::vector<std::string> pools = {"mean"};
  if (pm == PatchMaxLayout::kFull) pools.push_back("tstd");
  for (const auto& pool : pools) {
    for (int scale = 1; scale <= 2; ++scale) {
      for (const char* g : {"low", "medium", "high"}) {
        for (const auto& st : stats) s.names.push_back(fmt::format("patchmax.{}.s{}.{}.{}", pool, scale, g, st));
      }
    }
  }
  close();

  open("hdrmax");
  for (const char* pool : {"mean", "tstd"}) {
    for (int scale = 1; scale <= 2; ++scale) {
      for (const auto& st : stats) s.names.push_back(fmt::format("hdrmax.{}.s{}.{}", pool, scale, st));
    }
  }
  close();

  open("stchips");
  for (int scale = 1; scale <= 2; ++scale) {
    for (const auto& st : stats) s.names.push_back(fmt::format("stchips.s{}.{}", scale, st));
  }
  close();

  if (tv) {
    open("tv");
    s.names.push_back("tv.device");
    close();
  }
  return s;
}

std::size_t FeatureFile::row_of(const std::string& video_id) const {
  for (std::size_t i = 0; i < video_ids.size(); ++i) {
    if (video_ids[i] == video_id) return i;
  }
  throw Error(fmt::format("no feature row for video '{}'", video_id));
}

void FeatureFile::write(const std::string& path) const {
  const FeatureSchema s = schema_for(layout_version);
  if (values.rows() != video_ids.size() || (values.rows() > 0 && values.cols() != s.width())) {
    throw UsageError(fmt::format("feature table does not match layout {} ({} columns)", layout_version,
                                 s.width()));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << "# layout_version=" << layout_version << '\n';
  for (const auto& b : s.banks) os << "# bank " << b.name << ' ' << b.begin << ' ' << b.end << '\n';
  os << "video_id";
  for (const auto& n : s.names) os << ',' << n;
  os << '\n';
  for (std::size_t r = 0; r < values.rows(); ++r) {
    os << video_ids[r];
    for (double v : values.row(r)) os << ',' << format_double(v);
    os << '\n';
  }
  if (!os) throw Error(fmt::format("write to '{}' failed", path));
}

FeatureFile FeatureFile::read(const std::string& path) {
  const CsvTable t = read_csv(path);
  FeatureFile f;
  for (const auto& c : t.comments) {
    if (c.rfind("layout_version=", 0) == 0) f.layout_version = c.substr(15);
  }
  if (f.layout_version.empty()) {
    throw FormatError(fmt::format("'{}' has no layout_version header", path));
  }
  const FeatureSchema s = schema_for(f.layout_version);
  for (const auto& c : t.comments) {
    if (c.rfind("bank ", 0) != 0) continue;
    std::istringstream is(c.substr(5));
    FeatureBank b;
    is >> b.name >> b.begin >> b.end;
    const FeatureBank& expect = s.bank(b.name);
    if (b.begin != expect.begin || b.end != expect.end) {
      throw LayoutMismatchError(fmt::format("'{}': bank {} at [{}, {}) but layout {} puts it at [{}, {})",
                                            path, b.name, b.begin, b.end, f.layout_version,
                                            expect.begin, expect.end));
    }
  }
  if (t.header.size() != s.width() + 1 || t.header[0] != "video_id") {
    throw LayoutMismatchError(fmt::format("'{}': {} feature columns, layout {} has {}", path,
                                          t.header.size() - 1, f.layout_version, s.width()));
  }
  for (std::size_t k = 0; k < s.width(); ++k) {
    if (t.header[k + 1] != s.names[k]) {
      throw LayoutMismatchError(fmt::format("'{}': column {} is '{}', expected '{}'", path, k + 1,
                                            t.header[k + 1], s.names[k]));
    }
  }
  f.values = Matrix(0, s.width());
  std::set<std::string> seen;
  std::vector<double> row(s.width());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& fields = t.rows[r];
    if (!seen.insert(fields[0]).second) {
      throw FormatError(fmt::format("'{}': duplicate video id '{}'", path, fields[0]));
    }
    for (std::size_t k = 0; k < s.width(); ++k) {
      row[k] = parse_double(fields[k + 1], fmt::format("{} video {} column {}", path, fields[0], s.names[k]));
    }
    f.video_ids.push_back(fields[0]);
    f.values.append_row(row);
  }
  return f;
}

}  // namespace hdrvqa
