#include "hdrvqa/st_chips.h"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"

namespace hdrvqa {

void StChipsConfig::validate() const {
  if (!(temporal_a > 0)) throw UsageError(fmt::format("temporal_a {} must be positive", temporal_a));
  if (!(mscn_c > 0)) throw UsageError("mscn constant must be positive");
}

FramePlane sobel_magnitude(const FramePlane& luma) {
  const int w = luma.width(), h = luma.height();
  if (w < 3 || h < 3) throw UsageError(fmt::format("Sobel needs 3x3, got {}x{}", w, h));
  FramePlane out(w, h);
  for (int r = 0; r < h; ++r) {
    const double* up = luma.row(reflect_index(r - 1, h));
    const double* mid = luma.row(r);
    const double* dn = luma.row(reflect_index(r + 1, h));
    double* o = out.row(r);
    for (int c = 0; c < w; ++c) {
      const int cl = c == 0 ? 0 : c - 1;
      const int cr = c == w - 1 ? w - 1 : c + 1;
      const double gx = (up[cr] - up[cl]) + 2.0 * (mid[cr] - mid[cl]) + (dn[cr] - dn[cl]);
      const double gy = (dn[cl] - up[cl]) + 2.0 * (dn[c] - up[c]) + (dn[cr] - up[cr]);
      o[c] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

std::array<double, kBandpassTaps> raw_bandpass_taps(double a) {
  std::array<double, kBandpassTaps> taps{};
  for (int t = 0; t < kBandpassTaps; ++t) taps[t] = t * (1.0 - a * t) * std::exp(-2.0 * a * t);
  return taps;
}

std::array<double, kBandpassTaps> bandpass_taps(double a) {
  auto taps = raw_bandpass_taps(a);
  double mean = 0;
  for (double t : taps) mean += t;
  mean /= kBandpassTaps;
  for (double& t : taps) t -= mean;
  return taps;
}

std::vector<FramePlane> temporal_bandpass(std::span<const FramePlane> frames,
                                          const std::array<double, kBandpassTaps>& taps) {
  if (frames.size() < kBandpassTaps) {
    throw UsageError(fmt::format("temporal bandpass needs {} frames, got {}", kBandpassTaps,
                                 frames.size()));
  }
  const int w = frames[0].width(), h = frames[0].height();
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw UsageError("frame sizes differ");
  }
  double total = 0;
  for (double t : taps) total += t;
  std::vector<FramePlane> out;
  out.reserve(frames.size() - kBandpassTaps + 1);
  for (std::size_t k = 0; k + kBandpassTaps <= frames.size(); ++k) {
    FramePlane y(w, h);
    auto dst = y.samples();
    auto ref = frames[k].samples();
    // Filtering deviations from the first frame is the same linear map up
    // to the tap-sum term, and leaves static pixels at exactly 0 for
    // centered taps.
    for (int t = 1; t < kBandpassTaps; ++t) {
      auto src = frames[k + t].samples();
      const double tap = taps[t];
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += tap * (src[i] - ref[i]);
    }
    if (std::abs(total) > 1e-12) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += total * ref[i];
    }
    out.push_back(std::move(y));
  }
  return out;
}

std::array<std::array<int, 2>, kChipSide> chip_offsets(int m) {
  const double theta = m * std::numbers::pi / kChipOrientations;
  // Direction inside the chip, perpendicular to the normal (cos, sin).
  const double dx = -std::sin(theta);
  const double dy = std::cos(theta);
  std::array<std::array<int, 2>, kChipSide> off{};
  for (int s = 0; s < kChipSide; ++s) {
    const int k = s - kChipSide / 2;
    off[s] = {static_cast<int>(std::lround(k * dx)), static_cast<int>(std::lround(k * dy))};
  }
  return off;
}

namespace {

struct OffsetTable {
  std::array<std::array<std::array<int, 2>, kChipSide>, kChipOrientations> off;
  OffsetTable() {
    for (int m = 0; m < kChipOrientations; ++m) off[m] = chip_offsets(m);
  }
};

const OffsetTable& offset_table() {
  static const OffsetTable table;
  return table;
}

}  // namespace

Chip extract_chip(const Volume& v, int m) {
  const auto& off = offset_table().off[m];
  constexpr int c = kChipSide / 2;
  Chip chip{};
  for (int t = 0; t < kChipSide; ++t) {
    for (int s = 0; s < kChipSide; ++s) chip[t][s] = v[t][c + off[s][1]][c + off[s][0]];
  }
  return chip;
}

std::optional<ChipSelection> select_chips(const Volume& v) {
  std::optional<ChipSelection> best;
  for (int m = 0; m < kChipOrientations; ++m) {
    const Chip chip = extract_chip(v, m);
    std::array<double, kChipSide * kChipSide> flat{};
    for (int t = 0; t < kChipSide; ++t) {
      for (int s = 0; s < kChipSide; ++s) flat[t * kChipSide + s] = chip[t][s];
    }
    double k;
    try {
      k = excess_kurtosis(flat);
    } catch (const DegenerateInputError&) {
      continue;
    }
    if (!best || std::abs(k) < std::abs(best->kurtosis)) best = ChipSelection{chip, m, k};
  }
  return best;
}

std::optional<NssFeatures> stchips_block_features(std::span<const FramePlane> block) {
  if (block.size() != static_cast<std::size_t>(kChipSide)) {
    throw UsageError(fmt::format("chip block needs {} frames, got {}", kChipSide, block.size()));
  }
  const int gx = block[0].width() / kChipSide;
  const int gy = block[0].height() / kChipSide;
  std::vector<double> coeffs, h, v, d1, d2;
  Volume vol{};
  for (int cy = 0; cy < gy; ++cy) {
    for (int cx = 0; cx < gx; ++cx) {
      for (int t = 0; t < kChipSide; ++t) {
        for (int y = 0; y < kChipSide; ++y) {
          const double* row = block[t].row(cy * kChipSide + y) + cx * kChipSide;
          for (int x = 0; x < kChipSide; ++x) vol[t][y][x] = row[x];
        }
      }
      const auto sel = select_chips(vol);
      if (!sel) continue;
      const Chip& c = sel->chip;
      for (int t = 0; t < kChipSide; ++t) {
        for (int s = 0; s < kChipSide; ++s) {
          coeffs.push_back(c[t][s]);
          if (s + 1 < kChipSide) h.push_back(c[t][s] * c[t][s + 1]);
          if (t + 1 < kChipSide) {
            v.push_back(c[t][s] * c[t + 1][s]);
            if (s + 1 < kChipSide) d1.push_back(c[t][s] * c[t + 1][s + 1]);
            if (s >= 1) d2.push_back(c[t][s] * c[t + 1][s - 1]);
          }
        }
      }
    }
  }
  if (coeffs.empty()) return std::nullopt;
  try {
    NssFeatures f{};
    const GgdFit g = fit_ggd(coeffs);
    f[0] = g.alpha;
    f[1] = g.sigma2;
    int slot = 0;
    for (const auto* prod : {&h, &v, &d1, &d2}) {
      const AggdFit a = fit_aggd(*prod);
      f[2 + 4 * slot + 0] = a.eta;
      f[2 + 4 * slot + 1] = a.nu;
      f[2 + 4 * slot + 2] = a.sigma_l2;
      f[2 + 4 * slot + 3] = a.sigma_r2;
      ++slot;
    }
    return f;
  } catch (const DegenerateInputError&) {
    return std::nullopt;
  }
}

FramePlane mscn_gradient(const FramePlane& luma, double mscn_c) {
  static const GaussianWindow window;
  return mscn(sobel_magnitude(luma), window, mscn_c);
}

StChipsScaleAccumulator::StChipsScaleAccumulator(const StChipsConfig& cfg)
    : taps_(bandpass_taps(cfg.temporal_a)) {
  cfg.validate();
}

void StChipsScaleAccumulator::push_mscn_gradient(FramePlane g) {
  history_.push_back(std::move(g));
  if (history_.size() > kBandpassTaps) history_.erase(history_.begin());
  if (history_.size() < kBandpassTaps) return;
  auto filtered = temporal_bandpass(history_, taps_);
  filtered_.push_back(std::move(filtered.front()));
  if (filtered_.size() == static_cast<std::size_t>(kChipSide)) close_block();
}

void StChipsScaleAccumulator::close_block() {
  const auto f = stchips_block_features(filtered_);
  filtered_.clear();
  ++blocks_;
  if (!f) return;
  ++fitted_blocks_;
  for (int k = 0; k < kNssFeatureCount; ++k) sums_[k] += (*f)[k];
}

std::vector<double> StChipsScaleAccumulator::finish() const {
  if (blocks_ == 0) {
    throw UsageError(fmt::format("ST chips need at least {} frames", kStChipsMinFrames));
  }
  if (fitted_blocks_ == 0) {
    throw DegenerateInputError("ST chips: no block has fittable bandpass statistics");
  }
  std::vector<double> out(sums_);
  for (double& x : out) x /= static_cast<double>(fitted_blocks_);
  return out;
}

std::vector<double> stchips_video_features(std::span<const FramePlane> frames,
                                           const StChipsConfig& cfg, unsigned threads) {
  cfg.validate();
  if (frames.size() < kStChipsMinFrames) {
    throw UsageError(fmt::format("ST chips need at least {} frames, got {}", kStChipsMinFrames,
                                 frames.size()));
  }
  std::vector<double> out;
  for (int scale = 0; scale < 2; ++scale) {
    std::vector<FramePlane> grads(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
      grads[i] = scale == 0 ? mscn_gradient(frames[i], cfg.mscn_c)
                            : mscn_gradient(downscale2(frames[i]), cfg.mscn_c);
    });
    StChipsScaleAccumulator acc(cfg);
    for (auto& g : grads) acc.push_mscn_gradient(std::move(g));
    const auto f = acc.finish();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

}  // namespace hdrvqa
