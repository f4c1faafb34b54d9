#ifndef HDRVQA_NIQE_H_
#define HDRVQA_NIQE_H_

#include <span>
#include <string>
#include <vector>

#include "hdrvqa/media_io.h"
#include "hdrvqa/nss.h"

namespace hdrvqa {

inline constexpr int kNiqePatchFeatures = 2 * kNssFeatureCount;  // 36
inline constexpr int kNiqeFrameFeatures = kNiqePatchFeatures + 1;  // 37
inline constexpr int kNiqeModelFormatVersion = 1;

// Multivariate Gaussian fitted to patch features of pristine frames.
struct NiqePristineModel {
  std::vector<double> mu;   // 36
  std::vector<double> cov;  // 36 x 36, row-major
  int patch_size = 96;
  double sharpness_fraction = 0.75;
  double mscn_c = kDefaultMscnC;
  int format_version = kNiqeModelFormatVersion;

  // Throws FormatError on wrong sizes, asymmetry beyond 1e-10 or
  // eigenvalues below -1e-8.
  void validate() const;
};

struct NiqePatchSet {
  // One 36-vector per selected patch, in raster order:
  // [scale 1 (18) | scale 2 (18)].
  std::vector<std::vector<double>> features;
  std::size_t total_patches = 0;
  bool used_all_patches = false;  // no patch passed the sharpness test
};

// Tiles the frame into patch_size patches (patch_size/2 at scale 2) and
// keeps those whose mean local sigma is at least
// sharpness_fraction * (max patch mean sigma).
NiqePatchSet niqe_patch_features(const FramePlane& luma, int patch_size,
                                 double sharpness_fraction, double mscn_c = kDefaultMscnC);

// sqrt((a - b)^T ((cov_a + cov_b)/2 + lambda I)^-1 (a - b)); the inverse
// goes through a symmetric eigendecomposition with eigenvalues floored at
// lambda.
double niqe_distance(std::span<const double> mean_a, std::span<const double> cov_a,
                     std::span<const double> mean_b, std::span<const double> cov_b,
                     double lambda = 1e-6);

struct NiqeFrameResult {
  std::vector<double> features;  // 36 patch means + distance
  bool used_all_patches = false;
};

NiqeFrameResult niqe_frame(const FramePlane& luma, const NiqePristineModel& model);

// Mean of the per-frame 37-vectors.
std::vector<double> niqe_video_features(std::span<const FramePlane> frames,
                                        const NiqePristineModel& model, unsigned threads = 1);

// Pools selected patch features of every frame (in frame order) and fits
// mean and sample covariance. Needs at least 10 frames.
NiqePristineModel train_pristine_model(std::span<const FramePlane> frames, int patch_size = 96,
                                       double sharpness_fraction = 0.75,
                                       double mscn_c = kDefaultMscnC, unsigned threads = 1);

void save_niqe_model(const NiqePristineModel& model, const std::string& path);
NiqePristineModel load_niqe_model(const std::string& path);

// Sample covariance (n - 1 denominator) of row vectors; zeros for n < 2.
std::vector<double> sample_covariance(const std::vector<std::vector<double>>& rows,
                                      std::span<const double> mean);

}  // namespace hdrvqa

#endif  // HDRVQA_NIQE_H_
