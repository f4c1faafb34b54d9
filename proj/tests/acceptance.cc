// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "hdrvqa/config.h"
#include "hdrvqa/csv.h"
#include "hdrvqa/evaluation.h"
#include "hdrvqa/extractor.h"
#include "hdrvqa/feature_layout.h"
#include "hdrvqa/fr_metrics.h"
#include "hdrvqa/hdrmax.h"
#include "hdrvqa/nss.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/st_chips.h"
#include "hdrvqa/stats.h"
#include "hdrvqa/subjective.h"
#include "hdrvqa/synth.h"
#include "oracles.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

using namespace testing;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1 --------------------------------------------------------------------------

Outcome layout_widths() {
  const std::size_t s = schema_for(kLayoutSummary).width();
  const std::size_t f = schema_for(kLayoutFull).width();
  const auto sum = schema_for(kLayoutSummary);
  auto size = [&](const char* b) { return sum.bank(b).end - sum.bank(b).begin; };
  const bool banks = size("niqe") == 37 && size("patchmax") == 108 && size("hdrmax") == 72 && size("stchips") == 36;
  return {s == 253 && f == 361 && banks,
          fmt::format("summary-v1 {} = {}+{}+{}+{}, full-v1 {}", s, size("niqe"), size("patchmax"),
                      size("hdrmax"), size("stchips"), f)};
}

// 2 --------------------------------------------------------------------------

Outcome estimator_recovery() {
  const auto start = Clock::now();
  constexpr std::size_t kSamples = 100000;
  constexpr int kSeeds = 20;
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
    std::vector<double> est;
    for (int s = 0; s < kSeeds; ++s) est.push_back(fit_ggd(ggd_samples(alpha, kSamples, 1000 + s)).alpha);
    const double m = median_of(est);
    const double rel = std::abs(m - alpha) / alpha;
    ok = ok && rel <= 0.05;
    detail += fmt::format("ggd a={} -> {:.4f} ({:.2f}%); ", alpha, m, 100 * rel);
  }
  struct AggdCase {
    double nu, sl, sr;
  };
  double worst = 0;
  for (const AggdCase c : {AggdCase{0.6, 1.0, 2.0}, AggdCase{1.0, 1.0, 1.0}, AggdCase{2.0, 0.5, 1.5},
                           AggdCase{3.0, 2.0, 1.0}}) {
    std::vector<double> nu, sl, sr;
    for (int s = 0; s < kSeeds; ++s) {
      const AggdFit f = fit_aggd(aggd_samples(c.nu, c.sl, c.sr, kSamples, 2000 + s));
      nu.push_back(f.nu);
      sl.push_back(std::sqrt(f.sigma_l2));
      sr.push_back(std::sqrt(f.sigma_r2));
    }
    for (const auto& [got, want] : {std::pair{median_of(nu), c.nu}, std::pair{median_of(sl), c.sl},
                                    std::pair{median_of(sr), c.sr}}) {
      worst = std::max(worst, std::abs(got - want) / want);
    }
  }
  ok = ok && worst <= 0.10;
  const double t = seconds_since(start);
  ok = ok && t < 30;
  detail += fmt::format("aggd worst rel. error {:.2f}%; {:.1f} s", 100 * worst, t);
  return {ok, detail};
}

// 3 --------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  constexpr int kCases = 100;
  Rng rng(3);
  int bad_mscn = 0, bad_sobel = 0, bad_pair = 0, bad_ssim = 0, bad_psnr = 0, bad_chips = 0;
  const GaussianWindow win;
  for (int t = 0; t < kCases; ++t) {
    const int w = 7 + static_cast<int>(rng.below(18)), h = 7 + static_cast<int>(rng.below(18));
    const FramePlane p = random_plane(rng, w, h);
    const LocalMoments lm = naive_moments(p, win);
    const FramePlane m = mscn(p, win);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double want = (p.samples()[i] - lm.mu.samples()[i]) / (lm.sigma.samples()[i] + kDefaultMscnC);
      if (std::abs(m.samples()[i] - want) > 1e-8) {
        ++bad_mscn;
        break;
      }
    }
    const FramePlane s = sobel_magnitude(p), sn = naive_sobel(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::abs(s.samples()[i] - sn.samples()[i]) > 1e-8) {
        ++bad_sobel;
        break;
      }
    }
    const PairwiseProducts pp = pairwise_products(m);
    bool pair_ok = true;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (j + 1 < w) pair_ok &= pp.h.at(i, j) == m.at(i, j) * m.at(i, j + 1);
        if (i + 1 < h) pair_ok &= pp.v.at(i, j) == m.at(i, j) * m.at(i + 1, j);
        if (i + 1 < h && j + 1 < w) pair_ok &= pp.d1.at(i, j) == m.at(i, j) * m.at(i + 1, j + 1);
        if (i + 1 < h && j >= 1) pair_ok &= pp.d2.at(i, j - 1) == m.at(i, j) * m.at(i + 1, j - 1);
      }
    }
    bad_pair += !pair_ok;

    const int fw = 11 + static_cast<int>(rng.below(20)), fh = 11 + static_cast<int>(rng.below(20));
    const FramePlane a = random_plane(rng, fw, fh);
    FramePlane b = a;
    const double noise = 0.02 + 0.3 * rng.uniform();
    for (double& x : b.samples()) x = std::clamp(x + noise * normal_draw(rng), 0.0, 1.0);
    bad_ssim += std::abs(ssim_frame(a, b) - naive_ssim(a, b)) > 1e-8;
    bad_psnr += std::abs(psnr_frame(a, b) - naive_psnr(a, b)) > 1e-8;

    const Volume v = random_volume(rng);
    const auto sel = select_chips(v);
    int best = -1;
    double best_k = 0;
    for (int o = 0; o < 6; ++o) {
      const double k = oracle_kurtosis(oracle_slice(v, o));
      if (best < 0 || std::abs(k) < std::abs(best_k)) {
        best = o;
        best_k = k;
      }
    }
    bad_chips += !sel || sel->orientation != best || sel->chip != oracle_slice(v, best);
  }
  const double t = seconds_since(start);
  const int bad = bad_mscn + bad_sobel + bad_pair + bad_ssim + bad_psnr + bad_chips;
  return {bad == 0 && t < 60,
          fmt::format("{} cases each; mismatches mscn {} sobel {} pairwise {} ssim {} psnr {} chips {}; {:.1f} s",
                      kCases, bad_mscn, bad_sobel, bad_pair, bad_ssim, bad_psnr, bad_chips, t)};
}

// 4 --------------------------------------------------------------------------

Outcome mos_recovery() {
  const auto start = Clock::now();
  const PlantedScores p = planted_scores(2024, 50, 20);
  const MosSolution m = solve_mos(p.table);
  std::vector<double> psi;
  for (int v = 0; v < 50; ++v) psi.push_back(m.psi_of(fmt::format("v{:03d}", v), 1));
  const double r = plcc(psi, p.psi);
  // Bias is identifiable up to a shift; compare against the centered truth.
  const double shift = mean(p.delta);
  std::vector<double> planted;
  for (double d : p.delta) planted.push_back(d - shift);
  const double delta_rmse = rmse(m.delta, planted);
  bool monotone = true;
  for (std::size_t k = 1; k < m.ll_history.size(); ++k) {
    monotone &= m.ll_history[k] >= m.ll_history[k - 1] - 1e-9 * std::abs(m.ll_history[k - 1]);
  }
  const double t = seconds_since(start);
  return {r > 0.99 && delta_rmse < 1.0 && monotone && t < 5,
          fmt::format("Pearson {:.5f}, delta RMSE {:.4f}, {} sweeps, LL non-decreasing {}; {:.2f} s", r,
                      delta_rmse, m.sweeps, monotone ? "yes" : "no", t)};
}

// 5 --------------------------------------------------------------------------

struct SynthCorpus {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> content;
};

SynthCorpus extract_mini_corpus(unsigned threads) {
  ExtractorConfig cfg;
  cfg.niqe = load_niqe_model(bundled_niqe_model_path());
  cfg.patchmax.layout = PatchMaxLayout::kSummary;
  cfg.threads = threads;
  const VideoMeta meta = synth_meta(192, 192);
  SynthCorpus c;
  c.x = Matrix(0, cfg.width());
  for (const auto& clip : mini_corpus_plan(16, 5, 1)) {
    const auto frames = luma_planes(synth_clip(clip.content_seed, meta, 10, clip.distortion));
    c.x.append_row(extract_features(frames, cfg));
    c.y.push_back(clip.mos);
    c.content.push_back(clip.content_id);
  }
  return c;
}

Outcome protocol_sanity() {
  const unsigned threads = default_thread_count();
  auto start = Clock::now();
  const SynthCorpus c = extract_mini_corpus(threads);
  const double t_extract = seconds_since(start);

  const auto splits = make_splits(c.content, 0.8, 100, 11);
  EvalOptions opts;
  opts.threads = threads;
  start = Clock::now();
  const MetricReport real = evaluate_splits(c.x, c.y, splits, kLayoutSummary, opts, &c.content);
  const double t_real = seconds_since(start);

  // Each trial draws its own permutation; one shared permutation carries
  // a chance correlation with distortion level into every trial.
  opts.shuffle_seed = 12;
  start = Clock::now();
  const MetricReport null = evaluate_splits(c.x, c.y, splits, kLayoutSummary, opts, &c.content);
  const double t_null = seconds_since(start);

  const bool ok = real.srcc.median > 0.9 && std::abs(null.srcc.median) < 0.2 && real.failed == 0 &&
                  t_extract + t_real < 600 && t_extract + t_null < 600;
  return {ok, fmt::format("80 clips, summary-v1, 100 trials: median SRCC {:.4f} (std {:.4f}); shuffled "
                          "targets {:.4f}; extract {:.0f} s, evaluate {:.0f} s + {:.0f} s, {} threads",
                          real.srcc.median, real.srcc.std, null.srcc.median, t_extract, t_real, t_null, threads)};
}

// 7 --------------------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int tool(const std::string& args) {
  const std::string cmd = std::string("'") + HDRVQA_TOOL_PATH + "' " + args + " --log-level error";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  TempDir dir("acceptance_det");
  const VideoMeta meta = synth_meta(192, 192);
  {
    std::ofstream list(dir.file("list.csv")), scores(dir.file("scores.csv"));
    list << "video_id,path\n";
    scores << "video_id,score,content_id\n";
    for (const auto& c : mini_corpus_plan(6, 2, 5)) {
      write_video(dir.file(c.video_id + ".yuv"), synth_clip(c.content_seed, meta, 10, c.distortion), meta);
      std::ofstream(dir.file(c.video_id + ".yuv.json")) << meta_to_json(meta).dump() << '\n';
      list << c.video_id << ',' << c.video_id << ".yuv\n";
      scores << c.video_id << ',' << format_double(c.mos) << ',' << c.content_id << '\n';
    }
  }
  const std::string list = dir.file("list.csv");
  int codes = 0;
  codes |= tool("extract --list '" + list + "' --threads 1 -o '" + dir.file("a.csv") + "'");
  codes |= tool("extract --list '" + list + "' --threads 1 -o '" + dir.file("b.csv") + "'");
  codes |= tool("extract --list '" + list + "' --threads 4 -o '" + dir.file("c.csv") + "'");
  const std::string feats = slurp(dir.file("a.csv"));
  const bool extract_same = !feats.empty() && feats == slurp(dir.file("b.csv")) && feats == slurp(dir.file("c.csv"));

  const std::string train = "train-model --features '" + dir.file("a.csv") + "' --scores '" +
                            dir.file("scores.csv") + "' --seed 7 --set regressor.folds=3";
  codes |= tool(train + " --threads 1 -o '" + dir.file("m1.bin") + "'");
  codes |= tool(train + " --threads 1 -o '" + dir.file("m2.bin") + "'");
  codes |= tool(train + " --threads 4 -o '" + dir.file("m3.bin") + "'");
  const std::string model = slurp(dir.file("m1.bin"));
  const bool train_same = !model.empty() && model == slurp(dir.file("m2.bin")) && model == slurp(dir.file("m3.bin"));
  return {codes == 0 && extract_same && train_same,
          fmt::format("extract identical across runs and 1/4 threads: {}; train-model: {} ({} bytes)",
                      extract_same ? "yes" : "no", train_same ? "yes" : "no", model.size())};
}

// 8 --------------------------------------------------------------------------

Outcome hdr_sensitivity() {
  const VideoMeta meta = synth_meta(192, 192);
  const HdrMaxConfig cfg;
  const unsigned threads = default_thread_count();
  auto distance = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };
  int wins = 0;
  std::vector<double> ratios;
  const auto plan = mini_corpus_plan(16, 1, 1);
  for (const auto& clip : plan) {
    SynthDistortion banded, noised;
    banded.quant_step = 4;
    noised.noise_std = 1.0;
    noised.noise_seed = clip.content_seed + 77;
    const auto f0 = hdrmax_video_features(luma_planes(synth_clip(clip.content_seed, meta, 10)), cfg, threads);
    const auto fb = hdrmax_video_features(luma_planes(synth_clip(clip.content_seed, meta, 10, banded)), cfg, threads);
    const auto fn = hdrmax_video_features(luma_planes(synth_clip(clip.content_seed, meta, 10, noised)), cfg, threads);
    const double db = distance(f0, fb), dn = distance(f0, fn);
    wins += db > dn;
    ratios.push_back(db / dn);
  }
  return {wins == static_cast<int>(plan.size()),
          fmt::format("banded farther than noised in {}/{} contents; median distance ratio {:.2f}", wins,
                      plan.size(), median_of(ratios))};
}

}  // namespace
}  // namespace hdrvqa

int main() {
  using namespace hdrvqa;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "feature-layout fidelity", layout_widths},
      {2, "estimator recovery", estimator_recovery},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "MOS recovery", mos_recovery},
      {5, "protocol-level sanity", protocol_sanity},
      {7, "determinism", determinism},
      {8, "directional HDR sensitivity", hdr_sensitivity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (c.id == 7) {
      std::cout << "[N/A ] 6 published-number reproduction: not reproducible here; needs the LIVE HDRvsSDR "
                   "videos and raw opinion scores, which are not distributed with this repository (see "
                   "README for the command sequence)\n"
                << std::flush;
    }
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ' ' << c.name << ": " << o.detail << '\n'
              << std::flush;
  }
  std::cout << (failed ? fmt::format("{} criterion(s) failed\n", failed) : std::string("all criteria passed\n"));
  return failed ? 1 : 0;
}
