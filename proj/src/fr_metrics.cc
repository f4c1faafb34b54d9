#include "hdrvqa/fr_metrics.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hdrvqa/error.h"
#include "hdrvqa/nss.h"
#include "hdrvqa/parallel.h"

namespace hdrvqa {

namespace {

void check_same_size(const FramePlane& a, const FramePlane& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw UsageError(fmt::format("reference {}x{} and distorted {}x{} differ", a.width(),
                                 a.height(), b.width(), b.height()));
  }
}

// Valid-mode separable filter.
FramePlane filter_valid(const FramePlane& p, std::span<const double> taps) {
  const int n = static_cast<int>(taps.size());
  const int w = p.width() - n + 1, h = p.height() - n + 1;
  FramePlane tmp(w, p.height());
  for (int r = 0; r < p.height(); ++r) {
    const double* s = p.row(r);
    double* o = tmp.row(r);
    for (int c = 0; c < w; ++c) {
      double acc = 0;
      for (int k = 0; k < n; ++k) acc += taps[k] * s[c + k];
      o[c] = acc;
    }
  }
  FramePlane out(w, h);
  for (int r = 0; r < h; ++r) {
    double* o = out.row(r);
    for (int k = 0; k < n; ++k) {
      const double* s = tmp.row(r + k);
      for (int c = 0; c < w; ++c) o[c] += taps[k] * s[c];
    }
  }
  return out;
}

}  // namespace

double psnr_frame(const FramePlane& ref, const FramePlane& dist, double cap) {
  check_same_size(ref, dist);
  auto a = ref.samples(), b = dist.samples();
  double se = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    se += d * d;
  }
  if (se == 0) return cap;
  const double mse = se / static_cast<double>(a.size());
  return std::min(cap, 10.0 * std::log10(1.0 / mse));
}

double ssim_frame(const FramePlane& ref, const FramePlane& dist) {
  check_same_size(ref, dist);
  static const GaussianWindow window(5, 1.5);
  if (ref.width() < window.size() || ref.height() < window.size()) {
    throw UsageError(fmt::format("SSIM needs at least {}x{} frames", window.size(), window.size()));
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const std::size_t n = ref.size();
  FramePlane xx(ref.width(), ref.height()), yy(ref.width(), ref.height()),
      xy(ref.width(), ref.height());
  auto a = ref.samples(), b = dist.samples();
  auto pxx = xx.samples(), pyy = yy.samples(), pxy = xy.samples();
  for (std::size_t i = 0; i < n; ++i) {
    pxx[i] = a[i] * a[i];
    pyy[i] = b[i] * b[i];
    pxy[i] = a[i] * b[i];
  }
  const auto taps = window.taps();
  const FramePlane mx = filter_valid(ref, taps), my = filter_valid(dist, taps);
  const FramePlane sxx = filter_valid(xx, taps), syy = filter_valid(yy, taps),
                   sxy = filter_valid(xy, taps);
  double total = 0;
  const std::size_t m = mx.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double ux = mx.samples()[i], uy = my.samples()[i];
    const double vx = sxx.samples()[i] - ux * ux;
    const double vy = syy.samples()[i] - uy * uy;
    const double cxy = sxy.samples()[i] - ux * uy;
    total += ((2 * ux * uy + c1) * (2 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(m);
}

FrScores full_reference(std::span<const FramePlane> ref, std::span<const FramePlane> dist,
                        unsigned threads) {
  if (ref.size() != dist.size()) {
    throw UsageError(fmt::format("reference has {} frames, distorted {}", ref.size(), dist.size()));
  }
  if (ref.empty()) throw UsageError("no frames to compare");
  FrScores s;
  s.psnr.resize(ref.size());
  s.ssim.resize(ref.size());
  parallel_for(ref.size(), threads, [&](std::size_t i) {
    s.psnr[i] = psnr_frame(ref[i], dist[i]);
    s.ssim[i] = ssim_frame(ref[i], dist[i]);
  });
  for (std::size_t i = 0; i < ref.size(); ++i) {
    s.mean_psnr += s.psnr[i];
    s.mean_ssim += s.ssim[i];
  }
  s.mean_psnr /= static_cast<double>(ref.size());
  s.mean_ssim /= static_cast<double>(ref.size());
  return s;
}

double psnr(std::span<const FramePlane> ref, std::span<const FramePlane> dist) {
  if (ref.size() != dist.size()) throw UsageError("frame counts differ");
  if (ref.empty()) throw UsageError("no frames to compare");
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) sum += psnr_frame(ref[i], dist[i]);
  return sum / static_cast<double>(ref.size());
}

double ssim(std::span<const FramePlane> ref, std::span<const FramePlane> dist) {
  if (ref.size() != dist.size()) throw UsageError("frame counts differ");
  if (ref.empty()) throw UsageError("no frames to compare");
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) sum += ssim_frame(ref[i], dist[i]);
  return sum / static_cast<double>(ref.size());
}

}  // namespace hdrvqa
