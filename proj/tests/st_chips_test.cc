#include "hdrvqa/st_chips.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hdrvqa/error.h"
#include "oracles.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

using namespace testing;

TEST(Sobel, ConstantFrameIsZero) {
  const FramePlane g = sobel_magnitude(FramePlane(9, 7, 0.6));
  for (double x : g.samples()) EXPECT_EQ(x, 0.0);
}

TEST(Sobel, VerticalStepEdge) {
  const double h = 0.25;
  FramePlane p(10, 8, 0.0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 5; c < 10; ++c) p.at(r, c) = h;
  }
  const FramePlane g = sobel_magnitude(p);
  for (int r = 1; r < 7; ++r) {
    EXPECT_NEAR(g.at(r, 4), 4 * h, 1e-15);
    EXPECT_NEAR(g.at(r, 5), 4 * h, 1e-15);
    EXPECT_EQ(g.at(r, 2), 0.0);
  }
}

TEST(Sobel, MatchesNaiveConvolution) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const FramePlane p = testing::random_plane(rng, 3 + static_cast<int>(rng.below(20)),
                                               3 + static_cast<int>(rng.below(20)));
    const FramePlane got = sobel_magnitude(p);
    const FramePlane want = naive_sobel(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_NEAR(got.samples()[i], want.samples()[i], 1e-12) << trial;
    }
  }
}

TEST(Bandpass, RawTapsForHalf) {
  const auto t = raw_bandpass_taps(0.5);
  const double want[5] = {0, 0.18394, 0, -0.07468, -0.07326};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(t[k], want[k], 1e-5);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(t[k], k * (1 - 0.5 * k) * std::exp(-1.0 * k), 1e-15);
}

TEST(Bandpass, CenteredTapsSumToZero) {
  const auto raw = raw_bandpass_taps(0.5);
  const auto c = bandpass_taps(0.5);
  double mean = 0;
  for (double x : raw) mean += x / 5;
  double sum = 0;
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(c[k], raw[k] - mean, 1e-15);
    sum += c[k];
  }
  EXPECT_NEAR(sum, 0.0, 1e-15);
}

TEST(Bandpass, StaticInputIsZero) {
  Rng rng(2);
  const FramePlane f = testing::random_plane(rng, 6, 5);
  const std::vector<FramePlane> frames(7, f);
  const auto out = temporal_bandpass(frames, bandpass_taps(0.5));
  ASSERT_EQ(out.size(), 3u);
  for (const auto& p : out) {
    for (double x : p.samples()) EXPECT_EQ(x, 0.0);
  }
}

TEST(Bandpass, ImpulseTraceIsReversedTaps) {
  // Uncentred taps so the response is the tap vector itself.
  const auto taps = raw_bandpass_taps(0.5);
  std::vector<FramePlane> frames(9, FramePlane(3, 3, 0.0));
  frames[4].at(1, 1) = 1.0;
  const auto out = temporal_bandpass(frames, taps);
  ASSERT_EQ(out.size(), 5u);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(out[k].at(1, 1), taps[4 - k], 1e-15);
}

TEST(Bandpass, MatchesDirectCorrelation) {
  Rng rng(3);
  const auto taps = bandpass_taps(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(6);
    std::vector<FramePlane> frames;
    for (std::size_t t = 0; t < n; ++t) frames.push_back(testing::random_plane(rng, 4, 3));
    const auto out = temporal_bandpass(frames, taps);
    ASSERT_EQ(out.size(), n - 4);
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (std::size_t i = 0; i < 12; ++i) {
        double want = 0;
        for (int t = 0; t < 5; ++t) want += taps[t] * frames[k + t].samples()[i];
        ASSERT_NEAR(out[k].samples()[i], want, 1e-14);
      }
    }
  }
}

TEST(Bandpass, TooFewFrames) {
  const std::vector<FramePlane> frames(4, FramePlane(3, 3));
  EXPECT_THROW(temporal_bandpass(frames, bandpass_taps(0.5)), UsageError);
}

TEST(Chips, OffsetsFollowOrientation) {
  // m = 0: normal along x, chip runs down the column.
  const auto o0 = chip_offsets(0);
  for (int s = 0; s < 5; ++s) {
    EXPECT_EQ(o0[s][0], 0);
    EXPECT_EQ(o0[s][1], s - 2);
  }
  // m = 3: normal along y, chip runs along the row.
  const auto o3 = chip_offsets(3);
  for (int s = 0; s < 5; ++s) {
    EXPECT_EQ(o3[s][0], -(s - 2));
    EXPECT_EQ(o3[s][1], 0);
  }
}

TEST(Chips, SelectionMatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Volume v = random_volume(rng);
    const auto sel = select_chips(v);
    ASSERT_TRUE(sel.has_value());
    int best = -1;
    double best_k = 0;
    for (int m = 0; m < 6; ++m) {
      const double k = oracle_kurtosis(oracle_slice(v, m));
      if (best < 0 || std::abs(k) < std::abs(best_k)) {
        best = m;
        best_k = k;
      }
    }
    EXPECT_EQ(sel->orientation, best) << trial;
    EXPECT_NEAR(sel->kurtosis, best_k, 1e-10);
    EXPECT_EQ(sel->chip, oracle_slice(v, best));
  }
}

TEST(Chips, DegenerateSliceIsSkipped) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Volume v = random_volume(rng);
    // Flatten orientation 0 (the centre column) in every frame.
    for (int t = 0; t < 5; ++t) {
      for (int y = 0; y < 5; ++y) v[t][y][2] = 0.7;
    }
    const auto sel = select_chips(v);
    ASSERT_TRUE(sel.has_value());
    EXPECT_NE(sel->orientation, 0);
    int best = -1;
    double best_k = 0;
    for (int m = 1; m < 6; ++m) {
      const double k = oracle_kurtosis(oracle_slice(v, m));
      if (best < 0 || std::abs(k) < std::abs(best_k)) {
        best = m;
        best_k = k;
      }
    }
    EXPECT_EQ(sel->orientation, best);
  }
}

TEST(Chips, TiesGoToLowerIndex) {
  // Every sample in a frame equal: all slices are identical.
  Volume v{};
  Rng rng(6);
  for (int t = 0; t < 5; ++t) {
    const double a = normal_draw(rng);
    for (auto& row : v[t]) {
      for (double& x : row) x = a;
    }
  }
  const auto sel = select_chips(v);
  ASSERT_TRUE(sel.has_value());
  EXPECT_EQ(sel->orientation, 0);
}

TEST(Chips, AllFlatVolumeHasNoSelection) {
  Volume v{};
  EXPECT_FALSE(select_chips(v).has_value());
}

TEST(StChipsVideo, LengthIs36) {
  Rng rng(7);
  std::vector<FramePlane> frames;
  for (int t = 0; t < 9; ++t) frames.push_back(testing::gaussian_plane(rng, 40, 40));
  EXPECT_EQ(stchips_video_features(frames, StChipsConfig{}).size(), 36u);
}

TEST(StChipsVideo, StaticVideoIsDegenerate) {
  Rng rng(8);
  const std::vector<FramePlane> frames(9, testing::gaussian_plane(rng, 40, 40));
  EXPECT_THROW(stchips_video_features(frames, StChipsConfig{}), DegenerateInputError);
}

TEST(StChipsVideo, NeedsNineFrames) {
  Rng rng(9);
  std::vector<FramePlane> frames;
  for (int t = 0; t < 8; ++t) frames.push_back(testing::gaussian_plane(rng, 40, 40));
  EXPECT_THROW(stchips_video_features(frames, StChipsConfig{}), UsageError);
}

TEST(StChipsVideo, NoiseVideoHasGaussianChips) {
  Rng rng(10);
  std::vector<FramePlane> frames;
  for (int t = 0; t < 19; ++t) frames.push_back(testing::gaussian_plane(rng, 100, 100));
  const auto f = stchips_video_features(frames, StChipsConfig{});
  EXPECT_NEAR(f[0], 2.0, 0.3);
  EXPECT_NEAR(f[18], 2.0, 0.3);
}

TEST(StChipsVideo, AccumulatorMatchesBatch) {
  Rng rng(11);
  std::vector<FramePlane> frames;
  for (int t = 0; t < 14; ++t) frames.push_back(testing::gaussian_plane(rng, 30, 30));
  StChipsScaleAccumulator acc{StChipsConfig{}};
  for (const auto& f : frames) acc.push_mscn_gradient(mscn_gradient(f));
  EXPECT_EQ(acc.blocks_completed(), 2u);
  const auto batch = stchips_video_features(frames, StChipsConfig{}, 2);
  const auto s1 = acc.finish();
  for (int k = 0; k < 18; ++k) EXPECT_EQ(s1[k], batch[k]);
}

}  // namespace
}  // namespace hdrvqa
