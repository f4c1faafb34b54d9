#include "hdrvqa/niqe.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"

namespace hdrvqa {

void NiqePristineModel::validate() const {
  const std::size_t d = kNiqePatchFeatures;
  if (mu.size() != d || cov.size() != d * d) {
    throw FormatError(fmt::format("NIQE model needs a {}-vector and {}x{} covariance", d, d, d));
  }
  if (patch_size < 16 || patch_size % 2 != 0) {
    throw FormatError(fmt::format("NIQE patch size {} must be even and >= 16", patch_size));
  }
  if (!(sharpness_fraction >= 0 && sharpness_fraction <= 1)) {
    throw FormatError("NIQE sharpness fraction outside [0, 1]");
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      cov.data(), d, d);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw FormatError("NIQE covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw FormatError("NIQE covariance is not positive semidefinite");
  }
}

NiqePatchSet niqe_patch_features(const FramePlane& luma, int patch_size,
                                 double sharpness_fraction, double mscn_c) {
  static const GaussianWindow window;
  const int cols = luma.width() / patch_size;
  const int rows = luma.height() / patch_size;
  if (cols < 1 || rows < 1) {
    throw UsageError(fmt::format("frame {}x{} is smaller than the {}-pixel NIQE patch",
                                 luma.width(), luma.height(), patch_size));
  }
  const MscnResult s1 = mscn_with_sigma(luma, window, mscn_c);
  const FramePlane coeffs2 = mscn(downscale2(luma), window, mscn_c);
  const int half = patch_size / 2;

  std::vector<double> sharpness(static_cast<std::size_t>(cols) * rows, 0.0);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      double sum = 0;
      for (int r = pr * patch_size; r < (pr + 1) * patch_size; ++r) {
        const double* s = s1.sigma.row(r);
        for (int c = pc * patch_size; c < (pc + 1) * patch_size; ++c) sum += s[c];
      }
      sharpness[static_cast<std::size_t>(pr) * cols + pc] =
          sum / (static_cast<double>(patch_size) * patch_size);
    }
  }
  const double max_sharp = *std::max_element(sharpness.begin(), sharpness.end());
  const double threshold = sharpness_fraction * max_sharp;

  NiqePatchSet out;
  out.total_patches = sharpness.size();
  auto compute = [&](bool select) {
    for (int pr = 0; pr < rows; ++pr) {
      for (int pc = 0; pc < cols; ++pc) {
        if (select && !(sharpness[static_cast<std::size_t>(pr) * cols + pc] >= threshold &&
                         max_sharp > 0)) {
          continue;
        }
        try {
          const NssFeatures a =
              nss_features(s1.coeffs, Rect{pc * patch_size, pr * patch_size, patch_size, patch_size});
          const NssFeatures b = nss_features(coeffs2, Rect{pc * half, pr * half, half, half});
          std::vector<double> f(a.begin(), a.end());
          f.insert(f.end(), b.begin(), b.end());
          out.features.push_back(std::move(f));
        } catch (const DegenerateInputError&) {
        }
      }
    }
  };
  compute(true);
  if (out.features.empty()) {
    spdlog::warn("niqe: no patch passed the sharpness test; using all patches");
    out.used_all_patches = true;
    compute(false);
  }
  if (out.features.empty()) throw DegenerateInputError("niqe: no fittable patch in frame");
  return out;
}

std::vector<double> sample_covariance(const std::vector<std::vector<double>>& rows,
                                      std::span<const double> mean) {
  const std::size_t d = mean.size();
  std::vector<double> cov(d * d, 0.0);
  if (rows.size() < 2) return cov;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = r[i] - mean[i];
      for (std::size_t j = i; j < d; ++j) cov[i * d + j] += di * (r[j] - mean[j]);
    }
  }
  const double denom = static_cast<double>(rows.size() - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] /= denom;
      cov[j * d + i] = cov[i * d + j];
    }
  }
  return cov;
}

namespace {

std::vector<double> row_mean(const std::vector<std::vector<double>>& rows) {
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += r[k];
  }
  for (double& x : m) x /= static_cast<double>(rows.size());
  return m;
}

}  // namespace

double niqe_distance(std::span<const double> mean_a, std::span<const double> cov_a,
                     std::span<const double> mean_b, std::span<const double> cov_b,
                     double lambda) {
  const std::size_t d = mean_a.size();
  if (mean_b.size() != d || cov_a.size() != d * d || cov_b.size() != d * d) {
    throw UsageError("niqe_distance: dimension mismatch");
  }
  Eigen::MatrixXd pooled(d, d);
  Eigen::VectorXd diff(d);
  for (std::size_t i = 0; i < d; ++i) {
    diff(i) = mean_a[i] - mean_b[i];
    for (std::size_t j = 0; j < d; ++j) {
      pooled(i, j) = 0.5 * (cov_a[i * d + j] + cov_b[i * d + j]);
    }
    pooled(i, i) += lambda;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pooled);
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * diff;
  double q = 0;
  for (Eigen::Index k = 0; k < proj.size(); ++k) {
    q += proj(k) * proj(k) / std::max(es.eigenvalues()(k), lambda);
  }
  return std::sqrt(std::max(q, 0.0));
}

NiqeFrameResult niqe_frame(const FramePlane& luma, const NiqePristineModel& model) {
  const NiqePatchSet set =
      niqe_patch_features(luma, model.patch_size, model.sharpness_fraction, model.mscn_c);
  NiqeFrameResult out;
  out.used_all_patches = set.used_all_patches;
  out.features = row_mean(set.features);
  const std::vector<double> cov = sample_covariance(set.features, out.features);
  out.features.push_back(niqe_distance(out.features, cov, model.mu, model.cov));
  return out;
}

std::vector<double> niqe_video_features(std::span<const FramePlane> frames,
                                        const NiqePristineModel& model, unsigned threads) {
  if (frames.empty()) throw UsageError("niqe: no frames");
  std::vector<std::vector<double>> per_frame(frames.size());
  parallel_for(frames.size(), threads,
               [&](std::size_t i) { per_frame[i] = niqe_frame(frames[i], model).features; });
  return row_mean(per_frame);
}

NiqePristineModel train_pristine_model(std::span<const FramePlane> frames, int patch_size,
                                       double sharpness_fraction, double mscn_c,
                                       unsigned threads) {
  if (frames.empty()) throw UsageError("niqe-train: empty corpus");
  if (frames.size() < 10) {
    throw UsageError(fmt::format("niqe-train needs at least 10 frames, got {}", frames.size()));
  }
  std::vector<NiqePatchSet> sets(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t i) {
    sets[i] = niqe_patch_features(frames[i], patch_size, sharpness_fraction, mscn_c);
  });
  std::vector<std::vector<double>> pooled;
  for (auto& s : sets) {
    for (auto& f : s.features) pooled.push_back(std::move(f));
  }
  NiqePristineModel model;
  model.patch_size = patch_size;
  model.sharpness_fraction = sharpness_fraction;
  model.mscn_c = mscn_c;
  model.mu = row_mean(pooled);
  model.cov = sample_covariance(pooled, model.mu);
  return model;
}

void save_niqe_model(const NiqePristineModel& model, const std::string& path) {
  model.validate();
  nlohmann::json j = {{"format", "hdrvqa-niqe-pristine"},
                      {"format_version", model.format_version},
                      {"patch_size", model.patch_size},
                      {"sharpness_fraction", model.sharpness_fraction},
                      {"mscn_c", model.mscn_c},
                      {"mu", model.mu},
                      {"cov", model.cov}};
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot write '{}'", path));
  os << j.dump(1) << '\n';
}

NiqePristineModel load_niqe_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(fmt::format("cannot open NIQE model '{}'", path));
  NiqePristineModel m;
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kNiqeModelFormatVersion) {
      throw FormatError(fmt::format("NIQE model format {} unsupported", m.format_version));
    }
    m.patch_size = j.at("patch_size").get<int>();
    m.sharpness_fraction = j.at("sharpness_fraction").get<double>();
    m.mscn_c = j.value("mscn_c", kDefaultMscnC);
    m.mu = j.at("mu").get<std::vector<double>>();
    m.cov = j.at("cov").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("bad NIQE model '{}': {}", path, e.what()));
  }
  m.validate();
  return m;
}

}  // namespace hdrvqa
