#ifndef HDRVQA_DESCRIPTORS_H_
#define HDRVQA_DESCRIPTORS_H_

#include <span>

#include "hdrvqa/media_io.h"

namespace hdrvqa {

// Content descriptors on encoded (not linear-light) values.
//   si: max over frames of the spatial std of the Sobel magnitude
//   ti: max over successive frame pairs of the std of the difference
//   colorfulness: Hasler-Suesstrunk on R'G'B' in [0,1], mean over frames
//   avg_luminance: grand mean of normalized luma
struct DescriptorSet {
  double si = 0;
  double ti = 0;
  double colorfulness = 0;
  double avg_luminance = 0;
};

// Population std of a plane.
double plane_std(const FramePlane& p);

double colorfulness(const RgbPlanes& rgb);

// Needs at least two frames.
DescriptorSet descriptors(std::span<const YuvFrame> frames, const VideoMeta& meta);

// Streaming form used by the CLI.
class DescriptorAccumulator {
 public:
  explicit DescriptorAccumulator(const VideoMeta& meta) : meta_(meta) {}
  void push(const YuvFrame& frame);
  DescriptorSet finish() const;

 private:
  VideoMeta meta_;
  FramePlane previous_;
  std::size_t frames_ = 0;
  double si_ = 0, ti_ = 0, color_sum_ = 0, luma_sum_ = 0;
  std::size_t luma_count_ = 0;
};

}  // namespace hdrvqa

#endif  // HDRVQA_DESCRIPTORS_H_
