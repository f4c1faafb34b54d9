#ifndef HDRVQA_PATCHMAX_H_
#define HDRVQA_PATCHMAX_H_

#include <span>
#include <vector>

#include "hdrvqa/media_io.h"
#include "hdrvqa/nss.h"

namespace hdrvqa {

// Contrast-segmented patch statistics.
//
// Each frame is normalized once (MSCN over the whole frame), cut into
// non-overlapping P x P patches, and each patch is labelled low / medium
// / high contrast by the rank of its mean local sigma. The 18 NSS
// statistics of every patch are averaged inside each group, giving 54
// numbers per scale. Scale 2 is the same procedure on downscale2(luma)
// with P still counted in pixels.

enum class PatchMaxLayout {
  kFull,     // 108 frame means + 108 averaged 5-frame stds = 216
  kSummary,  // 108 frame means only
};

struct PatchMaxConfig {
  int patch_size = 20;
  double percentile = 10.0;
  PatchMaxLayout layout = PatchMaxLayout::kFull;
  double mscn_c = kDefaultMscnC;

  void validate() const;
};

enum class ContrastGroup : unsigned char { kLow = 0, kMedium = 1, kHigh = 2 };

struct ContrastGroups {
  int cols = 0;  // patch grid
  int rows = 0;
  std::vector<double> contrast;      // per patch, raster order
  std::vector<ContrastGroup> label;  // per patch, raster order

  std::size_t count(ContrastGroup g) const;
};

// Number of patches placed in each of the low and high groups:
// ceil(n*T/100), capped so the medium group keeps at least one patch.
std::size_t tail_group_size(std::size_t n_patches, double percentile);

// Labels patches by nearest rank with raster-order tie-breaking. Throws
// UsageError for fewer than 3 patches.
ContrastGroups label_contrasts(std::vector<double> contrast, int cols, int rows, double percentile);

// Patch contrast is the mean of the sigma plane over the patch; partial
// patches at the right and bottom edges are discarded.
ContrastGroups segment_patches(const FramePlane& sigma_plane, const PatchMaxConfig& cfg);

inline constexpr int kPatchMaxScaleFeatures = 3 * kNssFeatureCount;   // 54
inline constexpr int kPatchMaxFrameFeatures = 2 * kPatchMaxScaleFeatures;  // 108

struct PatchMaxScaleResult {
  std::vector<double> features;  // [low 18 | medium 18 | high 18]
  // Groups with no fittable patch, filled from the frame-global fit.
  int fallback_groups = 0;
};

PatchMaxScaleResult patchmax_scale_features(const FramePlane& luma, const PatchMaxConfig& cfg);

struct PatchMaxFrameResult {
  std::vector<double> features;  // [scale 1 (54) | scale 2 (54)]
  int fallback_groups = 0;
};

PatchMaxFrameResult patchmax_frame_features(const FramePlane& luma, const PatchMaxConfig& cfg);

int patchmax_video_feature_count(const PatchMaxConfig& cfg);

// Pools per-frame 108-vectors into the video layout selected by cfg.
std::vector<double> patchmax_pool(const std::vector<std::vector<double>>& per_frame,
                                  const PatchMaxConfig& cfg);

// 216 (full) or 108 (summary) features. Needs at least 5 frames.
std::vector<double> patchmax_video_features(std::span<const FramePlane> frames,
                                            const PatchMaxConfig& cfg, unsigned threads = 1);

}  // namespace hdrvqa

#endif  // HDRVQA_PATCHMAX_H_
