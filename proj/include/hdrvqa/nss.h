#ifndef HDRVQA_NSS_H_
#define HDRVQA_NSS_H_

#include <array>
#include <span>
#include <vector>

#include "hdrvqa/media_io.h"

namespace hdrvqa {

// Stabilizing constant of the divisive normalization on [0,1] luma.
inline constexpr double kDefaultMscnC = 1.0 / 255.0;

// (2L+1)x(2L+1) circularly symmetric Gaussian, sampled at integer offsets
// and renormalized to unit sum.
class GaussianWindow {
 public:
  explicit GaussianWindow(int half_width = 3, double sigma = 7.0 / 6.0);

  int half_width() const { return half_width_; }
  int size() const { return 2 * half_width_ + 1; }
  double sigma() const { return sigma_; }
  // Separable 1-D factor, sums to 1.
  std::span<const double> taps() const { return taps_; }
  double weight(int dm, int dl) const { return weights_[(dm + half_width_) * size() + dl + half_width_]; }
  std::span<const double> weights() const { return weights_; }

 private:
  int half_width_;
  double sigma_;
  std::vector<double> taps_;
  std::vector<double> weights_;
};

struct LocalMoments {
  FramePlane mu;
  FramePlane sigma;
};

// Symmetric boundary reflection: index -1 maps to 0, n maps to n-1.
inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

LocalMoments local_moments(const FramePlane& p, const GaussianWindow& win);

FramePlane mscn(const FramePlane& p, const GaussianWindow& win, double c = kDefaultMscnC);

// MSCN together with the sigma field it was normalized by.
struct MscnResult {
  FramePlane coeffs;
  FramePlane sigma;
};
MscnResult mscn_with_sigma(const FramePlane& p, const GaussianWindow& win,
                           double c = kDefaultMscnC);

struct PairwiseProducts {
  FramePlane h;   // m[i,j] * m[i,j+1]          (w-1) x h
  FramePlane v;   // m[i,j] * m[i+1,j]          w x (h-1)
  FramePlane d1;  // m[i,j] * m[i+1,j+1]        (w-1) x (h-1)
  FramePlane d2;  // m[i,j] * m[i+1,j-1], j>=1  (w-1) x (h-1)
};

PairwiseProducts pairwise_products(const FramePlane& m);

struct GgdFit {
  double alpha = 0;   // shape
  double beta = 0;    // scale
  double sigma2 = 0;  // variance
};

struct AggdFit {
  double nu = 0;
  double sigma_l2 = 0;
  double sigma_r2 = 0;
  double eta = 0;
};

// Moment matching against rho(a) = G(2/a)^2 / (G(1/a) G(3/a)), tabulated
// over a in [0.05, 10] at step 1e-3. Throws DegenerateInputError.
GgdFit fit_ggd(std::span<const double> samples);
AggdFit fit_aggd(std::span<const double> samples);

// Shape whose generalized Gaussian ratio equals r; clamps to the table
// range.
double invert_gaussian_ratio(double r);
double gaussian_ratio(double alpha);

// Population excess kurtosis. Throws DegenerateInputError when the
// variance is zero or fewer than four samples are given.
double excess_kurtosis(std::span<const double> samples);

// The 18 NSS statistics shared by every feature bank:
//   [alpha, sigma2] of the GGD fit to the coefficients, then
//   [eta, nu, sigma_l2, sigma_r2] of the AGGD fit to each of the
//   H, V, D1, D2 neighbour products.
inline constexpr int kNssFeatureCount = 18;
using NssFeatures = std::array<double, kNssFeatureCount>;

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Statistics over a rectangle of an MSCN field; products stay inside the
// rectangle.
NssFeatures nss_features(const FramePlane& coeffs, const Rect& rect);
inline NssFeatures nss_features(const FramePlane& coeffs) {
  return nss_features(coeffs, Rect{0, 0, coeffs.width(), coeffs.height()});
}

}  // namespace hdrvqa

#endif  // HDRVQA_NSS_H_
