#include "hdrvqa/niqe.h"

#include <cmath>

#include <gtest/gtest.h>

#include "hdrvqa/config.h"
#include "hdrvqa/error.h"
#include "hdrvqa/synth.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

std::vector<FramePlane> pristine_frames(int contents, int frames, int size) {
  std::vector<FramePlane> out;
  const VideoMeta meta = synth_meta(size, size);
  for (int c = 0; c < contents; ++c) {
    for (int t = 0; t < frames; ++t) out.push_back(synth_frame(kPristineSeedBase + c, meta, t).y);
  }
  return out;
}

TEST(SampleCovariance, MatchesTwoPassFormula) {
  const std::vector<std::vector<double>> rows = {{1, 2}, {3, 5}, {4, 4}, {0, 1}};
  const std::vector<double> mean = {2, 3};
  const auto c = sample_covariance(rows, mean);
  EXPECT_NEAR(c[0], (1 + 1 + 4 + 4) / 3.0, 1e-15);
  EXPECT_NEAR(c[1], (1 + 2 + 2 + 4) / 3.0, 1e-15);
  EXPECT_NEAR(c[2], c[1], 0);
  EXPECT_NEAR(c[3], (1 + 4 + 1 + 4) / 3.0, 1e-15);
}

TEST(Distance, IdenticalGaussiansGiveZero) {
  Rng rng(1);
  std::vector<double> mu(5), cov(25, 0.0);
  for (double& x : mu) x = normal_draw(rng);
  for (int i = 0; i < 5; ++i) cov[i * 5 + i] = 1 + i;
  EXPECT_NEAR(niqe_distance(mu, cov, mu, cov), 0.0, 1e-12);
}

TEST(Distance, DiagonalCaseIsScaledEuclidean) {
  const std::vector<double> a = {1, 0}, b = {0, 2};
  const std::vector<double> ca = {2, 0, 0, 8}, cb = {4, 0, 0, 2};
  // pooled = diag(3, 5)
  EXPECT_NEAR(niqe_distance(a, ca, b, cb, 0.0 + 1e-300), std::sqrt(1.0 / 3 + 4.0 / 5), 1e-12);
}

TEST(NiqeFrame, LengthIs37) {
  const NiqePristineModel model = load_niqe_model(bundled_niqe_model_path());
  const VideoMeta meta = synth_meta(192, 192);
  EXPECT_EQ(niqe_frame(synth_frame(3, meta, 0).y, model).features.size(), 37u);
}

TEST(NiqeFrame, SelfModelGivesZeroDistance) {
  const VideoMeta meta = synth_meta(384, 384);
  const FramePlane f = synth_frame(4, meta, 0).y;
  NiqePristineModel model;
  const NiqePatchSet set = niqe_patch_features(f, model.patch_size, model.sharpness_fraction);
  ASSERT_GE(set.features.size(), 2u);
  model.mu.assign(36, 0.0);
  for (const auto& row : set.features) {
    for (int k = 0; k < 36; ++k) model.mu[k] += row[k] / static_cast<double>(set.features.size());
  }
  model.cov = sample_covariance(set.features, model.mu);
  const NiqeFrameResult r = niqe_frame(f, model);
  EXPECT_NEAR(r.features[36], 0.0, 1e-9);
}

TEST(NiqeFrame, PristineFrameCloserThanBlurredCopy) {
  const NiqePristineModel model = load_niqe_model(bundled_niqe_model_path());
  for (const FramePlane& f : pristine_frames(3, 1, 192)) {
    const double clean = niqe_frame(f, model).features[36];
    const double blurred = niqe_frame(gaussian_blur(f, 3.0), model).features[36];
    EXPECT_LT(clean, blurred);
  }
}

TEST(PatchSelection, KeepsSharpPatches) {
  // Left half textured, right half flat: only textured patches survive.
  Rng rng(2);
  FramePlane f(384, 192, 0.5);
  for (int r = 0; r < 192; ++r) {
    for (int c = 0; c < 192; ++c) f.at(r, c) = 0.5 + 0.1 * normal_draw(rng);
  }
  const NiqePatchSet s = niqe_patch_features(f, 96, 0.75);
  EXPECT_EQ(s.total_patches, 8u);
  EXPECT_EQ(s.features.size(), 4u);
  EXPECT_FALSE(s.used_all_patches);
}

TEST(Training, RepeatedFrameCovarianceIsPatchCovariance) {
  const FramePlane f = synth_frame(5, synth_meta(384, 384), 0).y;
  const std::vector<FramePlane> frames(10, f);
  const NiqePristineModel m = train_pristine_model(frames);
  const NiqePatchSet set = niqe_patch_features(f, 96, 0.75);
  const std::size_t n = set.features.size();
  ASSERT_GE(n, 2u);
  const auto within = sample_covariance(set.features, m.mu);
  // Same mean; the pooled n-1 denominator grows from n-1 to 10n-1.
  const double ratio = (static_cast<double>(n) - 1) * 10.0 / (10.0 * static_cast<double>(n) - 1);
  for (std::size_t i = 0; i < within.size(); ++i) {
    EXPECT_NEAR(m.cov[i], within[i] * ratio, 1e-9 * (1 + std::abs(within[i])));
  }
}

TEST(Training, OwnCorpusCloserThanNoisyCorpus) {
  const auto frames = pristine_frames(4, 3, 192);
  const NiqePristineModel m = train_pristine_model(frames);
  Rng rng(6);
  double clean = 0, noisy = 0;
  for (const auto& f : frames) {
    clean += niqe_frame(f, m).features[36];
    FramePlane g = f;
    for (double& x : g.samples()) x += 0.02 * normal_draw(rng);
    noisy += niqe_frame(g, m).features[36];
  }
  EXPECT_LT(clean, noisy);
}

TEST(Training, NeedsTenFrames) {
  const auto frames = pristine_frames(1, 9, 192);
  EXPECT_THROW(train_pristine_model(frames), UsageError);
}

TEST(ModelFile, RoundTripIsBitExact) {
  testing::TempDir dir("niqe_rt");
  const NiqePristineModel m = train_pristine_model(pristine_frames(2, 5, 192));
  save_niqe_model(m, dir.file("m.json"));
  const NiqePristineModel back = load_niqe_model(dir.file("m.json"));
  EXPECT_EQ(back.mu, m.mu);
  EXPECT_EQ(back.cov, m.cov);
  const FramePlane f = synth_frame(9, synth_meta(192, 192), 2).y;
  EXPECT_EQ(niqe_frame(f, back).features, niqe_frame(f, m).features);
}

TEST(ModelFile, AsymmetricCovarianceIsRejected) {
  NiqePristineModel m = load_niqe_model(bundled_niqe_model_path());
  m.cov[1] += 1.0;
  EXPECT_THROW(m.validate(), FormatError);
}

TEST(NiqeVideo, MeanOfFrameVectors) {
  const NiqePristineModel model = load_niqe_model(bundled_niqe_model_path());
  const auto frames = luma_planes(synth_clip(8, synth_meta(192, 192), 3));
  const auto v = niqe_video_features(frames, model, 2);
  std::vector<double> want(37, 0.0);
  for (const auto& f : frames) {
    const auto r = niqe_frame(f, model).features;
    for (int k = 0; k < 37; ++k) want[k] += r[k];
  }
  for (int k = 0; k < 37; ++k) EXPECT_NEAR(v[k], want[k] / 3, 1e-12 * (1 + std::abs(want[k])));
}

}  // namespace
}  // namespace hdrvqa
