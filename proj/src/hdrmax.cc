#include "hdrvqa/hdrmax.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/temporal_pool.h"

namespace hdrvqa {

void HdrMaxConfig::validate() const {
  if (window <= 0 || stride <= 0 || window % stride != 0) {
    throw UsageError(fmt::format("hdrmax stride {} must divide window {}", stride, window));
  }
  if (!(delta > 0)) throw UsageError(fmt::format("hdrmax delta {} must be positive", delta));
  if (!(mscn_c > 0)) throw UsageError("mscn constant must be positive");
}

double expansive_nonlinearity(double x, double delta) {
  x = std::clamp(x, -1.0, 1.0);
  return x >= 0 ? std::expm1(delta * x) : -std::expm1(-delta * x);
}

FramePlane hdrmax_transform(const FramePlane& luma, const HdrMaxConfig& cfg) {
  cfg.validate();
  const int w = luma.width(), h = luma.height();
  if (w < cfg.window || h < cfg.window) {
    throw UsageError(fmt::format("frame {}x{} is smaller than the {}-pixel window", w, h,
                                 cfg.window));
  }
  const int margin = (cfg.window - cfg.stride) / 2;
  FramePlane out(w, h);
  for (int cy = 0; cy < h; cy += cfg.stride) {
    for (int cx = 0; cx < w; cx += cfg.stride) {
      const int y0 = std::max(0, cy - margin);
      const int x0 = std::max(0, cx - margin);
      const int y1 = std::min(h, cy + cfg.stride + margin);
      const int x1 = std::min(w, cx + cfg.stride + margin);
      double lo = luma.at(y0, x0), hi = lo;
      for (int r = y0; r < y1; ++r) {
        const double* s = luma.row(r);
        for (int c = x0; c < x1; ++c) {
          lo = std::min(lo, s[c]);
          hi = std::max(hi, s[c]);
        }
      }
      const int ry1 = std::min(h, cy + cfg.stride);
      const int rx1 = std::min(w, cx + cfg.stride);
      if (!(hi > lo)) continue;  // flat support, cell stays 0
      const double span = hi - lo;
      for (int r = cy; r < ry1; ++r) {
        const double* s = luma.row(r);
        double* o = out.row(r);
        for (int c = cx; c < rx1; ++c) {
          const double x = 2.0 * (s[c] - lo) / span - 1.0;
          o[c] = expansive_nonlinearity(x, cfg.delta);
        }
      }
    }
  }
  return out;
}

std::vector<double> hdrmax_frame_features(const FramePlane& luma, const HdrMaxConfig& cfg) {
  static const GaussianWindow window;
  std::vector<double> out;
  out.reserve(kHdrMaxFrameFeatures);
  const FramePlane half = downscale2(luma);
  for (const FramePlane* plane : {&luma, &half}) {
    const FramePlane t = hdrmax_transform(*plane, cfg);
    const NssFeatures f = nss_features(mscn(t, window, cfg.mscn_c));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

std::vector<double> hdrmax_video_features(std::span<const FramePlane> frames,
                                          const HdrMaxConfig& cfg, unsigned threads) {
  cfg.validate();
  if (frames.size() < kTemporalGroup) {
    throw UsageError(fmt::format("HDRMAX needs at least {} frames, got {}", kTemporalGroup,
                                 frames.size()));
  }
  std::vector<std::vector<double>> per_frame(frames.size());
  parallel_for(frames.size(), threads,
               [&](std::size_t i) { per_frame[i] = hdrmax_frame_features(frames[i], cfg); });
  TemporalPool pooled = temporal_pool(per_frame);
  std::vector<double> out = std::move(pooled.mean);
  out.insert(out.end(), pooled.tstd.begin(), pooled.tstd.end());
  return out;
}

}  // namespace hdrvqa
