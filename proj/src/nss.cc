#include "hdrvqa/nss.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hdrvqa/error.h"

namespace hdrvqa {

GaussianWindow::GaussianWindow(int half_width, double sigma)
    : half_width_(half_width), sigma_(sigma) {
  if (half_width < 1 || !(sigma > 0)) {
    throw UsageError(fmt::format("invalid Gaussian window L={} sigma={}", half_width, sigma));
  }
  const int n = size();
  taps_.resize(n);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const double d = i - half_width;
    taps_[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += taps_[i];
  }
  for (double& t : taps_) t /= sum;
  weights_.resize(static_cast<std::size_t>(n) * n);
  double wsum = 0;
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      const double dm = m - half_width, dl = l - half_width;
      weights_[m * n + l] = std::exp(-(dm * dm + dl * dl) / (2 * sigma * sigma));
      wsum += weights_[m * n + l];
    }
  }
  for (double& w : weights_) w /= wsum;
}

namespace {

// Separable filtering with symmetric reflection; two fields at once.
void separable_filter2(const FramePlane& a, const FramePlane& b, std::span<const double> taps,
                       FramePlane& out_a, FramePlane& out_b) {
  const int w = a.width(), h = a.height();
  const int half = static_cast<int>(taps.size()) / 2;
  FramePlane tmp_a(w, h), tmp_b(w, h);
  for (int r = 0; r < h; ++r) {
    const double* ra = a.row(r);
    const double* rb = b.row(r);
    double* ta = tmp_a.row(r);
    double* tb = tmp_b.row(r);
    for (int c = 0; c < w; ++c) {
      double sa = 0, sb = 0;
      if (c >= half && c + half < w) {
        for (int k = -half; k <= half; ++k) {
          sa += taps[k + half] * ra[c + k];
          sb += taps[k + half] * rb[c + k];
        }
      } else {
        for (int k = -half; k <= half; ++k) {
          const int cc = reflect_index(c + k, w);
          sa += taps[k + half] * ra[cc];
          sb += taps[k + half] * rb[cc];
        }
      }
      ta[c] = sa;
      tb[c] = sb;
    }
  }
  out_a = FramePlane(w, h);
  out_b = FramePlane(w, h);
  std::vector<const double*> rows_a(taps.size()), rows_b(taps.size());
  for (int r = 0; r < h; ++r) {
    for (int k = -half; k <= half; ++k) {
      const int rr = reflect_index(r + k, h);
      rows_a[k + half] = tmp_a.row(rr);
      rows_b[k + half] = tmp_b.row(rr);
    }
    double* oa = out_a.row(r);
    double* ob = out_b.row(r);
    for (int c = 0; c < w; ++c) {
      double sa = 0, sb = 0;
      for (std::size_t k = 0; k < taps.size(); ++k) {
        sa += taps[k] * rows_a[k][c];
        sb += taps[k] * rows_b[k][c];
      }
      oa[c] = sa;
      ob[c] = sb;
    }
  }
}

}  // namespace

LocalMoments local_moments(const FramePlane& p, const GaussianWindow& win) {
  if (p.width() < win.size() || p.height() < win.size()) {
    throw UsageError(fmt::format("plane {}x{} is smaller than the {}x{} window", p.width(),
                                 p.height(), win.size(), win.size()));
  }
  // Moments are taken about the first sample so that constant planes give
  // exactly mu = c, sigma = 0 and large offsets do not cancel.
  const double ref = p.samples()[0];
  FramePlane d(p.width(), p.height()), d2(p.width(), p.height());
  auto src = p.samples();
  auto dd = d.samples();
  auto dd2 = d2.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dd[i] = src[i] - ref;
    dd2[i] = dd[i] * dd[i];
  }
  FramePlane m1, m2;
  separable_filter2(d, d2, win.taps(), m1, m2);
  LocalMoments out{FramePlane(p.width(), p.height()), FramePlane(p.width(), p.height())};
  auto mu = out.mu.samples();
  auto sg = out.sigma.samples();
  auto s1 = m1.samples();
  auto s2 = m2.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu[i] = ref + s1[i];
    sg[i] = std::sqrt(std::max(0.0, s2[i] - s1[i] * s1[i]));
  }
  return out;
}

MscnResult mscn_with_sigma(const FramePlane& p, const GaussianWindow& win, double c) {
  if (!(c > 0)) throw UsageError("MSCN constant C must be positive");
  LocalMoments lm = local_moments(p, win);
  FramePlane coeffs(p.width(), p.height());
  auto src = p.samples();
  auto mu = lm.mu.samples();
  auto sg = lm.sigma.samples();
  auto out = coeffs.samples();
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = (src[i] - mu[i]) / (sg[i] + c);
  return {std::move(coeffs), std::move(lm.sigma)};
}

FramePlane mscn(const FramePlane& p, const GaussianWindow& win, double c) {
  return mscn_with_sigma(p, win, c).coeffs;
}

PairwiseProducts pairwise_products(const FramePlane& m) {
  const int w = m.width(), h = m.height();
  if (w < 2 || h < 2) {
    throw UsageError(fmt::format("pairwise products need a 2x2 plane, got {}x{}", w, h));
  }
  PairwiseProducts out{FramePlane(w - 1, h), FramePlane(w, h - 1), FramePlane(w - 1, h - 1),
                       FramePlane(w - 1, h - 1)};
  for (int r = 0; r < h; ++r) {
    const double* a = m.row(r);
    for (int c = 0; c + 1 < w; ++c) out.h.at(r, c) = a[c] * a[c + 1];
  }
  for (int r = 0; r + 1 < h; ++r) {
    const double* a = m.row(r);
    const double* b = m.row(r + 1);
    for (int c = 0; c < w; ++c) out.v.at(r, c) = a[c] * b[c];
    for (int c = 0; c + 1 < w; ++c) out.d1.at(r, c) = a[c] * b[c + 1];
    for (int c = 1; c < w; ++c) out.d2.at(r, c - 1) = a[c] * b[c - 1];
  }
  return out;
}

namespace {

constexpr double kShapeMin = 0.05;
constexpr double kShapeMax = 10.0;
constexpr double kShapeStep = 1e-3;

struct RatioTable {
  std::vector<double> shape;
  std::vector<double> ratio;

  RatioTable() {
    const int n = static_cast<int>(std::lround((kShapeMax - kShapeMin) / kShapeStep)) + 1;
    shape.resize(n);
    ratio.resize(n);
    for (int i = 0; i < n; ++i) {
      shape[i] = kShapeMin + i * kShapeStep;
      ratio[i] = gaussian_ratio(shape[i]);
    }
  }
};

const RatioTable& ratio_table() {
  static const RatioTable table;
  return table;
}

}  // namespace

double gaussian_ratio(double alpha) {
  return std::exp(2 * std::lgamma(2 / alpha) - std::lgamma(1 / alpha) - std::lgamma(3 / alpha));
}

double invert_gaussian_ratio(double r) {
  const RatioTable& t = ratio_table();
  if (!(r > t.ratio.front())) return t.shape.front();
  if (r >= t.ratio.back()) return t.shape.back();
  const auto it = std::upper_bound(t.ratio.begin(), t.ratio.end(), r);
  const std::size_t hi = static_cast<std::size_t>(it - t.ratio.begin());
  const std::size_t lo = hi - 1;
  const double f = (r - t.ratio[lo]) / (t.ratio[hi] - t.ratio[lo]);
  return t.shape[lo] + f * (t.shape[hi] - t.shape[lo]);
}

GgdFit fit_ggd(std::span<const double> samples) {
  if (samples.size() < 16) {
    throw DegenerateInputError(fmt::format("GGD fit needs 16 samples, got {}", samples.size()));
  }
  double abs_sum = 0, sq_sum = 0;
  double lo = samples[0], hi = samples[0];
  for (double x : samples) {
    abs_sum += std::abs(x);
    sq_sum += x * x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo == hi || !(sq_sum > 0)) throw DegenerateInputError("GGD fit on constant samples");
  const double n = static_cast<double>(samples.size());
  const double mean_abs = abs_sum / n;
  const double sigma2 = sq_sum / n;
  GgdFit fit;
  fit.alpha = invert_gaussian_ratio(mean_abs * mean_abs / sigma2);
  fit.sigma2 = sigma2;
  fit.beta = std::sqrt(sigma2) *
             std::exp(0.5 * (std::lgamma(1 / fit.alpha) - std::lgamma(3 / fit.alpha)));
  return fit;
}

AggdFit fit_aggd(std::span<const double> samples) {
  if (samples.size() < 16) {
    throw DegenerateInputError(fmt::format("AGGD fit needs 16 samples, got {}", samples.size()));
  }
  std::size_t n_left = 0, n_right = 0;
  double left_sq = 0, right_sq = 0, abs_sum = 0;
  for (double x : samples) {
    if (x < 0) {
      ++n_left;
      left_sq += x * x;
      abs_sum -= x;
    } else if (x > 0) {
      ++n_right;
      right_sq += x * x;
      abs_sum += x;
    }
  }
  if (n_left == 0 || n_right == 0) {
    throw DegenerateInputError("AGGD fit needs samples on both sides of zero");
  }
  const double n = static_cast<double>(samples.size());
  const double sigma_l = std::sqrt(left_sq / n_left);
  const double sigma_r = std::sqrt(right_sq / n_right);
  const double gamma = sigma_l / sigma_r;
  const double mean_abs = abs_sum / n;
  const double r_hat = mean_abs * mean_abs / ((left_sq + right_sq) / n);
  const double g2 = gamma * gamma;
  const double r_norm = r_hat * (gamma * g2 + 1) * (gamma + 1) / ((g2 + 1) * (g2 + 1));
  AggdFit fit;
  fit.nu = invert_gaussian_ratio(r_norm);
  fit.sigma_l2 = sigma_l * sigma_l;
  fit.sigma_r2 = sigma_r * sigma_r;
  const double scale = std::exp(0.5 * (std::lgamma(1 / fit.nu) - std::lgamma(3 / fit.nu)));
  const double beta_l = sigma_l * scale;
  const double beta_r = sigma_r * scale;
  fit.eta = (beta_r - beta_l) * std::exp(std::lgamma(2 / fit.nu) - std::lgamma(1 / fit.nu));
  return fit;
}

double excess_kurtosis(std::span<const double> samples) {
  if (samples.size() < 4) {
    throw DegenerateInputError(fmt::format("kurtosis needs 4 samples, got {}", samples.size()));
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0, m4 = 0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0)) throw DegenerateInputError("kurtosis of zero-variance samples");
  return m4 / (m2 * m2) - 3.0;
}

NssFeatures nss_features(const FramePlane& coeffs, const Rect& rect) {
  if (rect.x < 0 || rect.y < 0 || rect.width < 2 || rect.height < 2 ||
      rect.x + rect.width > coeffs.width() || rect.y + rect.height > coeffs.height()) {
    throw UsageError(fmt::format("rect {}x{}+{}+{} outside {}x{} plane", rect.width, rect.height,
                                 rect.x, rect.y, coeffs.width(), coeffs.height()));
  }
  const int x0 = rect.x, y0 = rect.y, x1 = rect.x + rect.width, y1 = rect.y + rect.height;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rect.width) * rect.height);
  for (int r = y0; r < y1; ++r) {
    const double* a = coeffs.row(r);
    values.insert(values.end(), a + x0, a + x1);
  }
  NssFeatures f{};
  const GgdFit g = fit_ggd(values);
  f[0] = g.alpha;
  f[1] = g.sigma2;

  std::vector<double> prod;
  prod.reserve(values.size());
  auto put = [&f](int slot, const AggdFit& a) {
    f[2 + 4 * slot + 0] = a.eta;
    f[2 + 4 * slot + 1] = a.nu;
    f[2 + 4 * slot + 2] = a.sigma_l2;
    f[2 + 4 * slot + 3] = a.sigma_r2;
  };
  // H
  for (int r = y0; r < y1; ++r) {
    const double* a = coeffs.row(r);
    for (int c = x0; c + 1 < x1; ++c) prod.push_back(a[c] * a[c + 1]);
  }
  put(0, fit_aggd(prod));
  // V
  prod.clear();
  for (int r = y0; r + 1 < y1; ++r) {
    const double* a = coeffs.row(r);
    const double* b = coeffs.row(r + 1);
    for (int c = x0; c < x1; ++c) prod.push_back(a[c] * b[c]);
  }
  put(1, fit_aggd(prod));
  // D1
  prod.clear();
  for (int r = y0; r + 1 < y1; ++r) {
    const double* a = coeffs.row(r);
    const double* b = coeffs.row(r + 1);
    for (int c = x0; c + 1 < x1; ++c) prod.push_back(a[c] * b[c + 1]);
  }
  put(2, fit_aggd(prod));
  // D2
  prod.clear();
  for (int r = y0; r + 1 < y1; ++r) {
    const double* a = coeffs.row(r);
    const double* b = coeffs.row(r + 1);
    for (int c = x0 + 1; c < x1; ++c) prod.push_back(a[c] * b[c - 1]);
  }
  put(3, fit_aggd(prod));
  return f;
}

}  // namespace hdrvqa
