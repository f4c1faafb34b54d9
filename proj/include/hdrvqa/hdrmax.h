#ifndef HDRVQA_HDRMAX_H_
#define HDRVQA_HDRMAX_H_

#include <span>
#include <vector>

#include "hdrvqa/media_io.h"
#include "hdrvqa/nss.h"

namespace hdrvqa {

struct HdrMaxConfig {
  int window = 20;
  int stride = 10;
  double delta = 4.0;
  double mscn_c = kDefaultMscnC;

  void validate() const;
};

// exp(d*x) - 1 for x >= 0, 1 - exp(-d*x) for x < 0; x is clamped to
// [-1, 1] first.
double expansive_nonlinearity(double x, double delta);

// The frame is tiled into stride x stride cells. Each cell is rescaled to
// [-1, 1] with the min/max of the window x window support centred on it
// (clipped at the borders) and passed through the nonlinearity. Flat
// supports produce zeros.
FramePlane hdrmax_transform(const FramePlane& luma, const HdrMaxConfig& cfg);

inline constexpr int kHdrMaxFrameFeatures = 2 * kNssFeatureCount;  // 36
inline constexpr int kHdrMaxVideoFeatures = 2 * kHdrMaxFrameFeatures;  // 72

// [scale 1 (18) | scale 2 (18)]; scale 2 transforms downscale2(luma).
std::vector<double> hdrmax_frame_features(const FramePlane& luma, const HdrMaxConfig& cfg);

// 36 frame means followed by 36 averaged 5-frame-group stds.
std::vector<double> hdrmax_video_features(std::span<const FramePlane> frames,
                                          const HdrMaxConfig& cfg, unsigned threads = 1);

}  // namespace hdrvqa

#endif  // HDRVQA_HDRMAX_H_
