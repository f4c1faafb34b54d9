#include "hdrvqa/patchmax.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hdrvqa/error.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/temporal_pool.h"

namespace hdrvqa {

void PatchMaxConfig::validate() const {
  if (patch_size < 8) throw UsageError(fmt::format("patch_size {} < 8", patch_size));
  if (!(percentile > 0 && percentile < 50)) {
    throw UsageError(fmt::format("percentile {} outside (0, 50)", percentile));
  }
  if (!(mscn_c > 0)) throw UsageError("mscn constant must be positive");
}

std::size_t ContrastGroups::count(ContrastGroup g) const {
  return static_cast<std::size_t>(std::count(label.begin(), label.end(), g));
}

std::size_t tail_group_size(std::size_t n_patches, double percentile) {
  const auto k = static_cast<std::size_t>(std::ceil(n_patches * percentile / 100.0 - 1e-12));
  return std::min(k, (n_patches - 1) / 2);
}

ContrastGroups label_contrasts(std::vector<double> contrast, int cols, int rows, double percentile) {
  const std::size_t n = contrast.size();
  if (n < 3) throw UsageError(fmt::format("contrast segmentation needs 3 patches, got {}", n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return contrast[a] < contrast[b]; });
  const std::size_t k = tail_group_size(n, percentile);
  ContrastGroups g;
  g.cols = cols;
  g.rows = rows;
  g.label.assign(n, ContrastGroup::kMedium);
  for (std::size_t i = 0; i < k; ++i) {
    g.label[order[i]] = ContrastGroup::kLow;
    g.label[order[n - 1 - i]] = ContrastGroup::kHigh;
  }
  g.contrast = std::move(contrast);
  return g;
}

ContrastGroups segment_patches(const FramePlane& sigma_plane, const PatchMaxConfig& cfg) {
  const int p = cfg.patch_size;
  const int cols = sigma_plane.width() / p;
  const int rows = sigma_plane.height() / p;
  if (cols * rows < 3) {
    throw UsageError(fmt::format("{}x{} frame yields {} patches of size {}; need 3",
                                 sigma_plane.width(), sigma_plane.height(), cols * rows, p));
  }
  std::vector<double> contrast(static_cast<std::size_t>(cols) * rows);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      double sum = 0;
      for (int r = pr * p; r < (pr + 1) * p; ++r) {
        const double* s = sigma_plane.row(r);
        for (int c = pc * p; c < (pc + 1) * p; ++c) sum += s[c];
      }
      contrast[static_cast<std::size_t>(pr) * cols + pc] = sum / (static_cast<double>(p) * p);
    }
  }
  return label_contrasts(std::move(contrast), cols, rows, cfg.percentile);
}

PatchMaxScaleResult patchmax_scale_features(const FramePlane& luma, const PatchMaxConfig& cfg) {
  static const GaussianWindow window;
  const MscnResult m = mscn_with_sigma(luma, window, cfg.mscn_c);
  const ContrastGroups groups = segment_patches(m.sigma, cfg);
  const int p = cfg.patch_size;

  std::array<NssFeatures, 3> sums{};
  std::array<int, 3> survivors{};
  for (int pr = 0; pr < groups.rows; ++pr) {
    for (int pc = 0; pc < groups.cols; ++pc) {
      const auto g = static_cast<int>(groups.label[static_cast<std::size_t>(pr) * groups.cols + pc]);
      NssFeatures f;
      try {
        f = nss_features(m.coeffs, Rect{pc * p, pr * p, p, p});
      } catch (const DegenerateInputError&) {
        continue;
      }
      for (int k = 0; k < kNssFeatureCount; ++k) sums[g][k] += f[k];
      ++survivors[g];
    }
  }

  PatchMaxScaleResult out;
  out.features.resize(kPatchMaxScaleFeatures);
  std::optional<NssFeatures> global;
  for (int g = 0; g < 3; ++g) {
    if (survivors[g] == 0) {
      if (!global) {
        try {
          global = nss_features(m.coeffs);
        } catch (const DegenerateInputError&) {
          throw DegenerateInputError("no fittable MSCN statistics in frame");
        }
      }
      spdlog::warn("patchmax: contrast group {} has no fittable patch; using frame-global fit", g);
      ++out.fallback_groups;
      std::copy(global->begin(), global->end(), out.features.begin() + g * kNssFeatureCount);
      continue;
    }
    for (int k = 0; k < kNssFeatureCount; ++k) {
      out.features[g * kNssFeatureCount + k] = sums[g][k] / survivors[g];
    }
  }
  return out;
}

PatchMaxFrameResult patchmax_frame_features(const FramePlane& luma, const PatchMaxConfig& cfg) {
  cfg.validate();
  PatchMaxScaleResult s1 = patchmax_scale_features(luma, cfg);
  PatchMaxScaleResult s2 = patchmax_scale_features(downscale2(luma), cfg);
  PatchMaxFrameResult out;
  out.features = std::move(s1.features);
  out.features.insert(out.features.end(), s2.features.begin(), s2.features.end());
  out.fallback_groups = s1.fallback_groups + s2.fallback_groups;
  return out;
}

int patchmax_video_feature_count(const PatchMaxConfig& cfg) {
  return cfg.layout == PatchMaxLayout::kFull ? 2 * kPatchMaxFrameFeatures : kPatchMaxFrameFeatures;
}

std::vector<double> patchmax_pool(const std::vector<std::vector<double>>& per_frame,
                                  const PatchMaxConfig& cfg) {
  TemporalPool pooled = temporal_pool(per_frame);
  std::vector<double> out = std::move(pooled.mean);
  if (cfg.layout == PatchMaxLayout::kFull) {
    out.insert(out.end(), pooled.tstd.begin(), pooled.tstd.end());
  }
  return out;
}

std::vector<double> patchmax_video_features(std::span<const FramePlane> frames,
                                            const PatchMaxConfig& cfg, unsigned threads) {
  cfg.validate();
  if (frames.size() < kTemporalGroup) {
    throw UsageError(fmt::format("PatchMAX needs at least {} frames, got {}", kTemporalGroup,
                                 frames.size()));
  }
  std::vector<std::vector<double>> per_frame(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t i) {
    per_frame[i] = patchmax_frame_features(frames[i], cfg).features;
  });
  return patchmax_pool(per_frame, cfg);
}

}  // namespace hdrvqa
