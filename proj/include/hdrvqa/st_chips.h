#ifndef HDRVQA_ST_CHIPS_H_
#define HDRVQA_ST_CHIPS_H_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hdrvqa/media_io.h"
#include "hdrvqa/nss.h"

namespace hdrvqa {

// Space-time gradient chips.
//
// Per scale: Sobel gradient magnitude -> MSCN -> 5-tap temporal bandpass
// (valid mode, so n frames give n-4 filtered frames). The filtered
// sequence is cut into non-overlapping blocks of 5 frames and each block
// into non-overlapping 5x5 spatial cells, giving 5x5x5 volumes. In each
// volume one of six oriented 5x5 space-time slices is kept (least
// |excess kurtosis|). Per block, the kept chips are pooled: GGD on their
// coefficients and AGGD on neighbour products taken inside each chip.
// Block results are averaged; two scales give 36 features.

struct StChipsConfig {
  double temporal_a = 0.5;
  double mscn_c = kDefaultMscnC;

  void validate() const;
};

inline constexpr int kChipSide = 5;
inline constexpr int kChipOrientations = 6;
inline constexpr int kBandpassTaps = 5;
inline constexpr int kStChipsVideoFeatures = 2 * kNssFeatureCount;  // 36
// Filtered frames needed for one block, plus the filter's support.
inline constexpr std::size_t kStChipsMinFrames = kChipSide + kBandpassTaps - 1;  // 9

FramePlane sobel_magnitude(const FramePlane& luma);

// t(1 - a t) exp(-2 a t) at t = 0..4, mean-subtracted.
std::array<double, kBandpassTaps> bandpass_taps(double a);
// The same without centering.
std::array<double, kBandpassTaps> raw_bandpass_taps(double a);

// out[k] = sum_t taps[t] * frames[k + t]; returns frames.size() - 4
// planes. Throws UsageError for fewer than 5 frames.
std::vector<FramePlane> temporal_bandpass(std::span<const FramePlane> frames,
                                          const std::array<double, kBandpassTaps>& taps);

// volume[t][y][x], t = frame in the block.
using Volume = std::array<std::array<std::array<double, kChipSide>, kChipSide>, kChipSide>;
// chip[t][s]: row = frame, column = position along the in-plane spatial
// direction.
using Chip = std::array<std::array<double, kChipSide>, kChipSide>;

// Spatial (dx, dy) offsets of the five samples of orientation m, relative
// to the volume centre. The chip's normal is at angle m*pi/6 in the
// spatial plane; samples lie along the perpendicular direction, rounded to
// the nearest grid point.
std::array<std::array<int, 2>, kChipSide> chip_offsets(int m);

Chip extract_chip(const Volume& v, int m);

struct ChipSelection {
  Chip chip{};
  int orientation = 0;
  double kurtosis = 0;
};

// Slice with the smallest |excess kurtosis|, ties to the lower index.
// nullopt when all six slices have zero variance.
std::optional<ChipSelection> select_chips(const Volume& v);

// Accumulates one scale frame by frame with bounded memory.
class StChipsScaleAccumulator {
 public:
  explicit StChipsScaleAccumulator(const StChipsConfig& cfg);

  // Takes the MSCN-of-gradient plane of the next frame.
  void push_mscn_gradient(FramePlane g);
  // Mean of the per-block 18-vectors. Throws DegenerateInputError when no
  // block produced a fit, UsageError when no block was completed.
  std::vector<double> finish() const;
  std::size_t blocks_completed() const { return blocks_; }

 private:
  void close_block();

  std::array<double, kBandpassTaps> taps_;
  std::vector<FramePlane> history_;   // last <= 5 MSCN-gradient frames
  std::vector<FramePlane> filtered_;  // current block, <= 5 frames
  std::vector<double> sums_ = std::vector<double>(kNssFeatureCount, 0.0);
  std::size_t blocks_ = 0;
  std::size_t fitted_blocks_ = 0;
};

// MSCN of the Sobel magnitude, used as accumulator input.
FramePlane mscn_gradient(const FramePlane& luma, double mscn_c = kDefaultMscnC);

// 18 statistics of one block of 5 filtered frames, or nullopt when no
// volume or pooled chip set is fittable.
std::optional<NssFeatures> stchips_block_features(std::span<const FramePlane> block);

// [scale 1 (18) | scale 2 (18)]. Needs at least 9 frames.
std::vector<double> stchips_video_features(std::span<const FramePlane> frames,
                                           const StChipsConfig& cfg, unsigned threads = 1);

}  // namespace hdrvqa

#endif  // HDRVQA_ST_CHIPS_H_
