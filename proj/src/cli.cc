#include "hdrvqa/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hdrvqa/config.h"
#include "hdrvqa/csv.h"
#include "hdrvqa/descriptors.h"
#include "hdrvqa/error.h"
#include "hdrvqa/evaluation.h"
#include "hdrvqa/extractor.h"
#include "hdrvqa/feature_layout.h"
#include "hdrvqa/forest.h"
#include "hdrvqa/fr_metrics.h"
#include "hdrvqa/media_io.h"
#include "hdrvqa/niqe.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/subjective.h"

namespace fs = std::filesystem;

namespace hdrvqa::cli {

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string log_level = "info";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "Override a config key: section.key=value (repeatable)")
      ->take_all();
  app->add_option("--threads", c.threads,
                  "Worker threads (0: HDRVQA_THREADS or all cores)")
      ->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--log-level", c.log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();
  app->footer(config_reference());
}

void setup_logging(const std::string& level) {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("hdrvqa-cli");
    l->set_pattern("%^[%l]%$ %v");
    spdlog::set_default_logger(l);
    return l;
  }();
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    throw UsageError(fmt::format("unknown log level '{}'", level));
  }
  logger->set_level(lvl);
}

ToolConfig resolve_config(const Common& c) {
  ToolConfig cfg;
  if (!c.config.empty()) cfg.load(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("--set expects key=value, got '{}'", s));
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.finalize();
  return cfg;
}

unsigned threads_of(const Common& c) { return c.threads == 0 ? default_thread_count() : c.threads; }

// ---------------------------------------------------------------------------
// Video inputs

struct VideoInput {
  std::string id;
  std::string path;
  VideoMeta meta;
};

VideoMeta load_meta(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError(fmt::format("cannot open metadata '{}'", path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("bad metadata '{}': {}", path, e.what()));
  }
  if (!j.contains("width") || !j.contains("height")) {
    throw UsageError(fmt::format("metadata '{}' lacks width/height", path));
  }
  VideoMeta m = meta_from_json(j);
  m.validate();
  return m;
}

std::string sidecar_for(const std::string& video) {
  for (const fs::path& p : {fs::path(video + ".json"), fs::path(video).replace_extension(".json")}) {
    if (fs::exists(p)) return p.string();
  }
  throw UsageError(fmt::format("no metadata for '{}' (pass --meta or add {}.json)", video, video));
}

struct InputOptions {
  std::vector<std::string> inputs;
  std::string list;
  std::string meta;
};

void add_inputs(CLI::App* app, InputOptions& o) {
  app->add_option("-i,--input", o.inputs, "Raw .yuv file(s); metadata from <file>.json unless --meta");
  app->add_option("--list", o.list, "CSV with video_id,path[,meta] columns")->check(CLI::ExistingFile);
  app->add_option("--meta", o.meta, "Metadata JSON applied to every --input")->check(CLI::ExistingFile);
}

std::vector<VideoInput> collect_inputs(const InputOptions& o) {
  std::vector<VideoInput> out;
  std::optional<VideoMeta> shared;
  if (!o.meta.empty()) shared = load_meta(o.meta);
  for (const auto& p : o.inputs) {
    out.push_back({fs::path(p).stem().string(), p, shared ? *shared : load_meta(sidecar_for(p))});
  }
  if (!o.list.empty()) {
    const CsvTable t = read_csv(o.list);
    const auto cid = t.column("video_id"), cpath = t.column("path");
    const auto has_meta = std::find(t.header.begin(), t.header.end(), "meta") != t.header.end();
    const fs::path base = fs::path(o.list).parent_path();
    for (const auto& r : t.rows) {
      fs::path p = r[cpath];
      if (p.is_relative()) p = base / p;
      VideoMeta m;
      if (has_meta && !r[t.column("meta")].empty()) {
        fs::path mp = r[t.column("meta")];
        if (mp.is_relative()) mp = base / mp;
        m = load_meta(mp.string());
      } else if (shared) {
        m = *shared;
      } else {
        m = load_meta(sidecar_for(p.string()));
      }
      out.push_back({r[cid], p.string(), m});
    }
  }
  if (out.empty()) throw UsageError("no input videos (use --input or --list)");
  std::map<std::string, int> seen;
  for (const auto& v : out) {
    if (++seen[v.id] > 1) throw UsageError(fmt::format("video id '{}' given twice", v.id));
  }
  return out;
}

NiqePristineModel niqe_model_for(const ToolConfig& cfg) {
  const std::string path = cfg.niqe_model.empty() ? bundled_niqe_model_path() : cfg.niqe_model;
  NiqePristineModel m = load_niqe_model(path);
  if (m.mscn_c != cfg.mscn_c) {
    spdlog::warn("NIQE model was trained with mscn_c={} but nss.mscn_c={}", m.mscn_c, cfg.mscn_c);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Score tables

struct ScoreRows {
  std::vector<std::string> video_ids;
  std::vector<double> scores;
  std::vector<std::string> content_ids;  // empty when absent
  std::vector<int> devices;              // empty when absent
};

ScoreRows read_scores(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto cv = t.column("video_id"), cs = t.column("score");
  auto find = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const auto cc = find("content_id"), cd = find("device_id");
  ScoreRows s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string ctx = fmt::format("{} row {}", path, i + 1);
    s.video_ids.push_back(r[cv]);
    s.scores.push_back(parse_double(r[cs], ctx));
    if (cc) s.content_ids.push_back(r[*cc]);
    if (cd) s.devices.push_back(static_cast<int>(parse_long(r[*cd], ctx)));
  }
  return s;
}

struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> video_ids;
  std::vector<std::string> content_ids;
  std::string layout;
};

// One row per score row, in feature-file order. Every feature row must
// have at least one score.
Dataset join(const FeatureFile& f, const ScoreRows& s, bool tv) {
  std::multimap<std::string, std::size_t> by_video;
  for (std::size_t i = 0; i < s.video_ids.size(); ++i) by_video.emplace(s.video_ids[i], i);
  Dataset d;
  d.x = Matrix(0, f.values.cols());
  std::vector<int> devices;
  std::map<std::string, int> used;
  for (std::size_t r = 0; r < f.video_ids.size(); ++r) {
    const auto [lo, hi] = by_video.equal_range(f.video_ids[r]);
    if (lo == hi) throw Error(fmt::format("no score for training video '{}'", f.video_ids[r]));
    for (auto it = lo; it != hi; ++it) {
      const std::size_t i = it->second;
      d.x.append_row(f.values.row(r));
      d.y.push_back(s.scores[i]);
      d.video_ids.push_back(f.video_ids[r]);
      d.content_ids.push_back(s.content_ids.empty() ? f.video_ids[r] : s.content_ids[i]);
      if (!s.devices.empty()) devices.push_back(s.devices[i]);
      ++used[f.video_ids[r]];
    }
  }
  for (const auto& v : s.video_ids) {
    if (!used.count(v)) spdlog::warn("score for video '{}' has no feature row; ignored", v);
  }
  d.layout = f.layout_version;
  if (tv) {
    if (devices.empty()) throw UsageError("--tv needs a device_id column in the score file");
    d.x = augment_device_index(d.x, devices);
    d.layout = augmented_layout(d.layout);
  }
  return d;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << text;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_probe(const Common& c, const InputOptions& in) {
  resolve_config(c);
  for (const auto& v : collect_inputs(in)) {
    VideoReader reader(v.path, v.meta);
    std::size_t oor = 0;
    while (auto f = reader.next()) oor += f->out_of_range_luma;
    const nlohmann::json j = {{"video_id", v.id},
                              {"path", v.path},
                              {"meta", meta_to_json(v.meta)},
                              {"frames", reader.frame_count()},
                              {"frame_bytes", v.meta.frame_bytes()},
                              {"out_of_range_luma", oor}};
    std::cout << j.dump() << '\n';
    if (oor > 0) spdlog::warn("{}: {} luma samples outside the limited range", v.id, oor);
  }
  return kExitOk;
}

int cmd_extract(const Common& c, const InputOptions& in, const std::string& out,
                std::optional<std::size_t> max_frames) {
  const ToolConfig cfg = resolve_config(c);
  ExtractorConfig ec;
  ec.niqe = niqe_model_for(cfg);
  ec.patchmax = cfg.patchmax;
  ec.hdrmax = cfg.hdrmax;
  ec.stchips = cfg.stchips;
  ec.threads = threads_of(c);
  ec.max_frames = max_frames;
  const auto videos = collect_inputs(in);
  FeatureFile f;
  f.layout_version = ec.layout_version();
  f.values = Matrix(0, ec.width());
  int failed = 0;
  for (const auto& v : videos) {
    try {
      const auto row = extract_video_features(v.path, v.meta, ec);
      f.video_ids.push_back(v.id);
      f.values.append_row(row);
      spdlog::info("{}: {} features", v.id, row.size());
    } catch (const std::exception& e) {
      ++failed;
      spdlog::error("{}: {}", v.id, e.what());
    }
  }
  f.write(out);
  if (failed) {
    spdlog::error("{} of {} video(s) failed; their rows are missing from {}", failed, videos.size(), out);
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& features, const std::string& scores,
              const std::string& out, bool tv) {
  const ToolConfig cfg = resolve_config(c);
  const FeatureFile f = FeatureFile::read(features);
  const Dataset d = join(f, read_scores(scores), tv);
  TrainOptions opts;
  opts.threads = threads_of(c);
  opts.groups = d.content_ids;
  CvResult cv;
  const ForestModel model = train_forest(d.x, d.y, cfg.regressor.grid, c.seed, d.layout, opts, &cv);
  save_forest(model, out);
  spdlog::info("trained {} trees, max_features={}, CV SRCC {:.4f}", model.params.n_estimators,
               to_string(model.params.max_features), cv.mean_srcc);
  return kExitOk;
}

int cmd_predict(const Common& c, const std::string& model_path, const std::string& features,
                const std::string& devices_path, const std::string& out) {
  resolve_config(c);
  const ForestModel model = load_forest(model_path);
  const FeatureFile f = FeatureFile::read(features);
  Matrix x = f.values;
  std::string layout = f.layout_version;
  std::vector<std::string> ids = f.video_ids;
  std::vector<int> devs;
  if (!devices_path.empty()) {
    const CsvTable t = read_csv(devices_path);
    const auto cv = t.column("video_id"), cd = t.column("device_id");
    Matrix rows(0, x.cols());
    ids.clear();
    for (const auto& r : t.rows) {
      rows.append_row(f.values.row(f.row_of(r[cv])));
      ids.push_back(r[cv]);
      devs.push_back(static_cast<int>(parse_long(r[cd], devices_path)));
    }
    x = augment_device_index(rows, devs);
    layout = augmented_layout(layout);
  }
  const auto pred = predict(model, x, layout);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot write '{}'", out));
  os << (devs.empty() ? "video_id,prediction\n" : "video_id,device_id,prediction\n");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    os << ids[i] << ',';
    if (!devs.empty()) os << devs[i] << ',';
    os << format_double(pred[i]) << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& features, const std::string& scores,
                 const std::string& out_dir, bool tv, bool no_cv, bool shuffle) {
  const ToolConfig cfg = resolve_config(c);
  const FeatureFile f = FeatureFile::read(features);
  const ScoreRows s = read_scores(scores);
  if (s.content_ids.empty()) {
    spdlog::warn("score file has no content_id column; every video is its own content");
  }
  const Dataset d = join(f, s, tv);
  const auto splits = make_splits(d.content_ids, cfg.regressor.train_ratio, cfg.regressor.trials, c.seed);
  EvalOptions eo;
  eo.grid = cfg.regressor.grid;
  eo.cross_validate = !no_cv;
  eo.fixed = {*std::max_element(eo.grid.n_estimators.begin(), eo.grid.n_estimators.end()),
              eo.grid.max_features.front(), eo.grid.min_samples_leaf};
  eo.threads = threads_of(c);
  if (shuffle) eo.shuffle_seed = c.seed ^ 0x5bd1e995ULL;
  const MetricReport report = evaluate_splits(d.x, d.y, splits, d.layout, eo, &d.content_ids);
  fs::create_directories(out_dir);
  write_trials_csv(report, (fs::path(out_dir) / "trials.csv").string());
  write_summary_json(report, (fs::path(out_dir) / "summary.json").string());
  write_scatter_csv(report, d.video_ids, (fs::path(out_dir) / "scatter.csv").string());
  std::cout << fmt::format("SRCC {:.4f} ({:.4f})  PLCC {:.4f} ({:.4f})  RMSE {:.4f} ({:.4f})  "
                           "trials {} failed {}\n",
                           report.srcc.median, report.srcc.std, report.plcc.median, report.plcc.std,
                           report.rmse.median, report.rmse.std, report.trials.size(), report.failed);
  return report.failed == static_cast<int>(report.trials.size()) ? kExitRuntime : kExitOk;
}

int cmd_mos(const Common& c, const std::string& scores, const std::string& out,
            const std::string& subjects_out, const std::string& references, const std::string& dmos_out,
            bool consistency, int trials) {
  resolve_config(c);
  const SubjectScoreTable table = SubjectScoreTable::read_csv(scores);
  const MosSolution sol = solve_mos(table);
  {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", out));
    os << "video_id,device_id,mos\n";
    for (std::size_t j = 0; j < sol.stimuli.size(); ++j) {
      os << sol.stimuli[j].video << ',' << sol.stimuli[j].device << ',' << format_double(sol.psi[j]) << '\n';
    }
  }
  if (!subjects_out.empty()) {
    std::ofstream os(subjects_out, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", subjects_out));
    os << "subject_id,bias,inconsistency\n";
    for (std::size_t i = 0; i < sol.subjects.size(); ++i) {
      os << sol.subjects[i] << ',' << format_double(sol.delta[i]) << ',' << format_double(sol.nu[i]) << '\n';
    }
  }
  if (!references.empty()) {
    if (dmos_out.empty()) throw UsageError("--references needs --dmos-out");
    const CsvTable t = read_csv(references);
    const auto cv = t.column("video_id"), cr = t.column("reference_id");
    std::map<std::string, std::string> ref;
    for (const auto& r : t.rows) ref[r[cv]] = r[cr];
    std::ofstream os(dmos_out, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", dmos_out));
    os << "video_id,device_id,reference_id,dmos\n";
    for (const auto& e : dmos(sol, ref)) {
      os << e.stimulus.video << ',' << e.stimulus.device << ',' << e.reference << ','
         << format_double(e.dmos) << '\n';
    }
  }
  nlohmann::json summary = {{"sweeps", sol.sweeps},
                            {"converged", sol.converged},
                            {"log_likelihood", sol.log_likelihood},
                            {"floored_subjects", sol.floored_subjects}};
  if (consistency) {
    std::set<int> devices;
    for (const auto& r : table.records) devices.insert(r.device);
    for (int dev : devices) {
      const auto ic = internal_correlation(table, dev, trials, c.seed, threads_of(c));
      summary["internal_correlation"][std::to_string(dev)] = ic.median_r;
    }
  }
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_merge(const Common& c, const std::string& anchors, const std::string& out,
              const std::string& apply, const std::string& apply_out) {
  resolve_config(c);
  const CsvTable t = read_csv(anchors);
  const auto cs = t.column("src_score"), cd = t.column("dst_score");
  std::vector<double> src, dst;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string ctx = fmt::format("{} row {}", anchors, i + 1);
    src.push_back(parse_double(t.rows[i][cs], ctx));
    dst.push_back(parse_double(t.rows[i][cd], ctx));
  }
  const MergeMap m = fit_merge_map(src, dst);
  const nlohmann::json j = {{"a", m.a}, {"b", m.b}, {"c", m.c}, {"s", m.s},
                            {"rmse", m.rmse}, {"iterations", m.iterations}, {"anchors", src.size()}};
  write_text(out, j.dump(2) + "\n");
  if (!apply.empty()) {
    if (apply_out.empty()) throw UsageError("--apply needs --apply-out");
    const CsvTable a = read_csv(apply);
    const auto av = a.column("video_id"), as = a.column("score");
    std::ofstream os(apply_out, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", apply_out));
    os << "video_id,score\n";
    for (const auto& r : a.rows) os << r[av] << ',' << format_double(m(parse_double(r[as], apply))) << '\n';
  }
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_descriptors(const Common& c, const InputOptions& in, const std::string& out) {
  resolve_config(c);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot write '{}'", out));
  os << "video_id,si,ti,colorfulness,avg_luminance\n";
  int failed = 0;
  for (const auto& v : collect_inputs(in)) {
    try {
      VideoReader reader(v.path, v.meta);
      DescriptorAccumulator acc(v.meta);
      while (auto f = reader.next()) acc.push(*f);
      const DescriptorSet d = acc.finish();
      os << v.id << ',' << format_double(d.si) << ',' << format_double(d.ti) << ','
         << format_double(d.colorfulness) << ',' << format_double(d.avg_luminance) << '\n';
    } catch (const std::exception& e) {
      ++failed;
      spdlog::error("{}: {}", v.id, e.what());
    }
  }
  return failed ? kExitRuntime : kExitOk;
}

int cmd_fr(const Common& c, const std::string& ref, const std::string& dist, const std::string& meta,
           const std::string& out) {
  resolve_config(c);
  const VideoMeta mr = meta.empty() ? load_meta(sidecar_for(ref)) : load_meta(meta);
  const VideoMeta md = meta.empty() ? load_meta(sidecar_for(dist)) : mr;
  if (mr.width != md.width || mr.height != md.height) {
    throw UsageError("reference and distorted videos differ in size");
  }
  VideoReader rr(ref, mr), rd(dist, md);
  if (rr.frame_count() != rd.frame_count()) {
    throw UsageError(fmt::format("reference has {} frames, distorted {}", rr.frame_count(), rd.frame_count()));
  }
  std::vector<FramePlane> a, b;
  while (auto f = rr.next_luma()) a.push_back(std::move(*f));
  while (auto f = rd.next_luma()) b.push_back(std::move(*f));
  const FrScores s = full_reference(a, b, threads_of(c));
  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error(fmt::format("cannot write '{}'", out));
    os << "frame,psnr,ssim\n";
    for (std::size_t i = 0; i < s.psnr.size(); ++i) {
      os << i << ',' << format_double(s.psnr[i]) << ',' << format_double(s.ssim[i]) << '\n';
    }
  }
  std::cout << nlohmann::json{{"psnr", s.mean_psnr}, {"ssim", s.mean_ssim}, {"frames", s.psnr.size()}}.dump()
            << '\n';
  return kExitOk;
}

int cmd_niqe_train(const Common& c, const InputOptions& in, const std::string& out, int patch_size,
                   double sharpness, std::optional<std::size_t> max_frames) {
  const ToolConfig cfg = resolve_config(c);
  std::vector<FramePlane> frames;
  for (const auto& v : collect_inputs(in)) {
    VideoReader reader(v.path, v.meta);
    std::size_t n = 0;
    while (!max_frames || n < *max_frames) {
      auto f = reader.next_luma();
      if (!f) break;
      frames.push_back(std::move(*f));
      ++n;
    }
  }
  const NiqePristineModel m = train_pristine_model(frames, patch_size, sharpness, cfg.mscn_c, threads_of(c));
  save_niqe_model(m, out);
  spdlog::info("pristine model from {} frames written to {}", frames.size(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"No-reference HDR/SDR video quality toolkit"};
  app.require_subcommand(1);
  app.footer(config_reference());

  Common common;
  InputOptions in;
  std::string out, features, scores, model, devices, out_dir, references, dmos_out, subjects_out;
  std::string anchors, apply, apply_out, ref, dist, meta, layout;
  std::optional<std::size_t> max_frames;
  bool tv = false, no_cv = false, shuffle = false, consistency = false;
  int trials = 100, patch_size = 96;
  std::optional<int> eval_trials;
  double sharpness = 0.75;
  std::string niqe_model;

  auto* probe = app.add_subcommand("probe", "Check raw videos against their metadata");
  add_common(probe, common);
  add_inputs(probe, in);

  auto* extract = app.add_subcommand("extract", "Compute quality features for each video");
  add_common(extract, common);
  add_inputs(extract, in);
  extract->add_option("-o,--out", out, "Feature CSV")->required();
  extract->add_option("--layout", layout, "Feature layout: full or summary (patchmax.layout)");
  extract->add_option("--niqe-model", niqe_model, "Pristine NIQE model JSON (niqe.model)");
  extract->add_option("--max-frames", max_frames, "Use at most this many frames per video");

  auto* train = app.add_subcommand("train-model", "Fit the quality regressor");
  add_common(train, common);
  train->add_option("--features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--scores", scores, "CSV with video_id,score[,content_id][,device_id]")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("-o,--out", out, "Model file")->required();
  train->add_flag("--tv", tv, "Append the display-device index as a feature");

  auto* pred = app.add_subcommand("predict", "Predict quality from features");
  add_common(pred, common);
  pred->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  pred->add_option("--features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  pred->add_option("--devices", devices, "CSV video_id,device_id for device-augmented models")
      ->check(CLI::ExistingFile);
  pred->add_option("-o,--out", out, "Prediction CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Repeated content-aware train/test evaluation");
  add_common(eval, common);
  eval->add_option("--features", features, "Feature CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--scores", scores, "CSV with video_id,score,content_id[,device_id]")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out-dir", out_dir, "Directory for trials.csv, summary.json, scatter.csv")->required();
  eval->add_option("--trials", eval_trials, "Number of splits (regressor.trials)");
  eval->add_flag("--tv", tv, "Append the display-device index as a feature");
  eval->add_flag("--no-cv", no_cv, "Skip the hyperparameter search; use the largest tree count and "
                                   "the first max_features mode");
  eval->add_flag("--shuffle-targets", shuffle, "Permute scores independently in each trial (null check)");

  auto* mos = app.add_subcommand("mos", "Recover MOS/DMOS from raw opinion scores");
  add_common(mos, common);
  mos->add_option("--scores", scores, "CSV subject_id,video_id,device_id,score")
      ->required()
      ->check(CLI::ExistingFile);
  mos->add_option("-o,--out", out, "MOS CSV")->required();
  mos->add_option("--subjects-out", subjects_out, "Per-subject bias and inconsistency CSV");
  mos->add_option("--references", references, "CSV video_id,reference_id")->check(CLI::ExistingFile);
  mos->add_option("--dmos-out", dmos_out, "DMOS CSV");
  mos->add_flag("--consistency", consistency, "Report split-half internal correlation per device");
  mos->add_option("--trials", trials, "Random splits for --consistency")->capture_default_str();

  auto* merge = app.add_subcommand("merge", "Fit a logistic map between score scales");
  add_common(merge, common);
  merge->add_option("--anchors", anchors, "CSV src_score,dst_score")->required()->check(CLI::ExistingFile);
  merge->add_option("-o,--out", out, "Map parameters JSON")->required();
  merge->add_option("--apply", apply, "CSV video_id,score to map")->check(CLI::ExistingFile);
  merge->add_option("--apply-out", apply_out, "Mapped scores CSV");

  auto* desc = app.add_subcommand("descriptors", "SI, TI, colorfulness and average luminance");
  add_common(desc, common);
  add_inputs(desc, in);
  desc->add_option("-o,--out", out, "Descriptor CSV")->required();

  auto* fr = app.add_subcommand("fr", "PSNR and SSIM against a reference");
  add_common(fr, common);
  fr->add_option("--reference", ref, "Reference .yuv")->required()->check(CLI::ExistingFile);
  fr->add_option("--distorted", dist, "Distorted .yuv")->required()->check(CLI::ExistingFile);
  fr->add_option("--meta", meta, "Metadata JSON for both files")->check(CLI::ExistingFile);
  fr->add_option("-o,--out", out, "Per-frame CSV");

  auto* ntrain = app.add_subcommand("niqe-train", "Fit a pristine NIQE model");
  add_common(ntrain, common);
  add_inputs(ntrain, in);
  ntrain->add_option("-o,--out", out, "Model JSON")->required();
  ntrain->add_option("--patch-size", patch_size, "Patch side at full scale")->capture_default_str();
  ntrain->add_option("--sharpness", sharpness, "Patch sharpness fraction")->capture_default_str();
  ntrain->add_option("--max-frames", max_frames, "Use at most this many frames per video");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    setup_logging(common.log_level);
    if (!layout.empty()) common.sets.push_back("patchmax.layout=" + layout);
    if (!niqe_model.empty()) common.sets.push_back("niqe.model=" + niqe_model);
    if (eval_trials) common.sets.push_back("regressor.trials=" + std::to_string(*eval_trials));
    if (*probe) return cmd_probe(common, in);
    if (*extract) return cmd_extract(common, in, out, max_frames);
    if (*train) return cmd_train(common, features, scores, out, tv);
    if (*pred) return cmd_predict(common, model, features, devices, out);
    if (*eval) return cmd_evaluate(common, features, scores, out_dir, tv, no_cv, shuffle);
    if (*mos) {
      return cmd_mos(common, scores, out, subjects_out, references, dmos_out, consistency, trials);
    }
    if (*merge) return cmd_merge(common, anchors, out, apply, apply_out);
    if (*desc) return cmd_descriptors(common, in, out);
    if (*fr) return cmd_fr(common, ref, dist, meta, out);
    if (*ntrain) return cmd_niqe_train(common, in, out, patch_size, sharpness, max_frames);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace hdrvqa::cli
