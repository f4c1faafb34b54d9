#include "hdrvqa/descriptors.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hdrvqa/error.h"
#include "hdrvqa/st_chips.h"

namespace hdrvqa {

double plane_std(const FramePlane& p) {
  auto s = p.samples();
  if (s.empty()) return 0;
  const double ref = s[0];
  double mean = 0;
  for (double x : s) mean += x - ref;
  mean /= static_cast<double>(s.size());
  double var = 0;
  for (double x : s) {
    const double d = (x - ref) - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(s.size()));
}

double colorfulness(const RgbPlanes& rgb) {
  const std::size_t n = rgb.r.size();
  auto r = rgb.r.samples(), g = rgb.g.samples(), b = rgb.b.samples();
  double m_rg = 0, m_yb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m_rg += r[i] - g[i];
    m_yb += 0.5 * (r[i] + g[i]) - b[i];
  }
  m_rg /= static_cast<double>(n);
  m_yb /= static_cast<double>(n);
  double v_rg = 0, v_yb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (r[i] - g[i]) - m_rg;
    const double c = (0.5 * (r[i] + g[i]) - b[i]) - m_yb;
    v_rg += a * a;
    v_yb += c * c;
  }
  v_rg /= static_cast<double>(n);
  v_yb /= static_cast<double>(n);
  return std::sqrt(v_rg + v_yb) + 0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb);
}

void DescriptorAccumulator::push(const YuvFrame& frame) {
  if (frames_ > 0 && (frame.y.width() != previous_.width() ||
                      frame.y.height() != previous_.height())) {
    throw UsageError("descriptor frames differ in size");
  }
  si_ = std::max(si_, plane_std(sobel_magnitude(frame.y)));
  if (frames_ > 0) {
    FramePlane diff(frame.y.width(), frame.y.height());
    auto d = diff.samples();
    auto a = frame.y.samples();
    auto b = previous_.samples();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    ti_ = std::max(ti_, plane_std(diff));
  }
  color_sum_ += colorfulness(yuv_to_rgb(frame.y, frame.u, frame.v, meta_));
  for (double x : frame.y.samples()) luma_sum_ += x;
  luma_count_ += frame.y.size();
  previous_ = frame.y;
  ++frames_;
}

DescriptorSet DescriptorAccumulator::finish() const {
  if (frames_ < 2) {
    throw UsageError(fmt::format("descriptors need at least 2 frames, got {}", frames_));
  }
  return {si_, ti_, color_sum_ / static_cast<double>(frames_),
          luma_sum_ / static_cast<double>(luma_count_)};
}

DescriptorSet descriptors(std::span<const YuvFrame> frames, const VideoMeta& meta) {
  DescriptorAccumulator acc(meta);
  for (const auto& f : frames) acc.push(f);
  return acc.finish();
}

}  // namespace hdrvqa
