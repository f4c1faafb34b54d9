#include "hdrvqa/descriptors.h"

#include <cmath>

#include <gtest/gtest.h>

#include "hdrvqa/error.h"
#include "hdrvqa/synth.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

YuvFrame gray_frame(int w, int h, double y) {
  YuvFrame f;
  f.y = FramePlane(w, h, y);
  f.u = FramePlane(w / 2, h / 2, 512.0 / 1023.0);
  f.v = FramePlane(w / 2, h / 2, 512.0 / 1023.0);
  return f;
}

TEST(Descriptors, ConstantGrayVideo) {
  const VideoMeta meta = synth_meta(16, 12);
  const std::vector<YuvFrame> frames(3, gray_frame(16, 12, 0.45));
  const DescriptorSet d = descriptors(frames, meta);
  EXPECT_EQ(d.si, 0.0);
  EXPECT_EQ(d.ti, 0.0);
  EXPECT_NEAR(d.colorfulness, 0.0, 1e-12);
  EXPECT_NEAR(d.avg_luminance, 0.45, 1e-12);
}

TEST(Descriptors, StaticNoiseHasSpatialButNoTemporalInformation) {
  Rng rng(1);
  YuvFrame f = gray_frame(32, 32, 0.5);
  f.y = testing::random_plane(rng, 32, 32, 0.2, 0.8);
  const std::vector<YuvFrame> frames(4, f);
  const DescriptorSet d = descriptors(frames, synth_meta(32, 32));
  EXPECT_EQ(d.ti, 0.0);
  EXPECT_GT(d.si, 0.0);
}

TEST(Descriptors, TemporalInformationIsMaxDifferenceStd) {
  Rng rng(2);
  std::vector<YuvFrame> frames;
  for (int t = 0; t < 4; ++t) {
    YuvFrame f = gray_frame(16, 16, 0.5);
    f.y = testing::random_plane(rng, 16, 16);
    frames.push_back(f);
  }
  double want = 0;
  for (int t = 1; t < 4; ++t) {
    FramePlane d(16, 16);
    for (std::size_t i = 0; i < d.size(); ++i) d.samples()[i] = frames[t].y.samples()[i] - frames[t - 1].y.samples()[i];
    want = std::max(want, plane_std(d));
  }
  EXPECT_NEAR(descriptors(frames, synth_meta(16, 16)).ti, want, 1e-15);
}

TEST(Descriptors, NeedsTwoFrames) {
  const std::vector<YuvFrame> frames(1, gray_frame(8, 8, 0.5));
  EXPECT_THROW(descriptors(frames, synth_meta(8, 8)), UsageError);
}

TEST(Colorfulness, GrayIsZeroAndSaturatedIsPositive) {
  RgbPlanes gray{FramePlane(4, 4, 0.3), FramePlane(4, 4, 0.3), FramePlane(4, 4, 0.3)};
  EXPECT_NEAR(colorfulness(gray), 0.0, 1e-15);
  RgbPlanes red{FramePlane(4, 4, 1.0), FramePlane(4, 4, 0.0), FramePlane(4, 4, 0.0)};
  // Constant colour: only the mean term, 0.3 * sqrt(rg^2 + yb^2).
  EXPECT_NEAR(colorfulness(red), 0.3 * std::sqrt(1.0 + 0.25), 1e-12);
}

TEST(PlaneStd, Population) {
  EXPECT_NEAR(plane_std(FramePlane(2, 2, {0, 0, 2, 2})), 1.0, 1e-15);
}

}  // namespace
}  // namespace hdrvqa
