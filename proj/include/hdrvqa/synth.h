#ifndef HDRVQA_SYNTH_H_
#define HDRVQA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "hdrvqa/media_io.h"

namespace hdrvqa {

// Deterministic test footage: a luminance ramp, drifting 1/f gratings and
// a few soft bright highlights, written as limited-range codes. Used for
// the bundled mini-corpus, the pristine NIQE model that ships with the
// tool, and the property tests.

struct SynthDistortion {
  double blur_sigma = 0;        // Gaussian blur of luma, pixels
  double noise_std = 0;         // additive Gaussian luma noise, codes
  int quant_step = 1;           // luma codes snapped to multiples of this
  std::uint64_t noise_seed = 0;
};

// Default metadata of synthetic clips: 10-bit limited-range PQ / BT.2020.
VideoMeta synth_meta(int width, int height);

// Clean luma code values (not rounded) of frame t.
FramePlane synth_luma_codes(std::uint64_t content_seed, int width, int height, int t, int bit_depth);

YuvFrame synth_frame(std::uint64_t content_seed, const VideoMeta& meta, int t,
                     const SynthDistortion& d = {});

std::vector<YuvFrame> synth_clip(std::uint64_t content_seed, const VideoMeta& meta, int frames,
                                 const SynthDistortion& d = {});

std::vector<FramePlane> luma_planes(const std::vector<YuvFrame>& clip);

// Separable Gaussian blur with mirrored borders; sigma 0 is a copy.
FramePlane gaussian_blur(const FramePlane& p, double sigma);

// Mini-corpus plan: every content at distortion levels 0..levels-1.
// Level k blurs with sigma 0.6k and adds noise of std 1.5k codes; its
// score is 85 - 14k plus N(0, 3^2) rating noise.
struct CorpusClip {
  std::string video_id;    // "c<content>_d<level>"
  std::string content_id;  // "c<content>"
  std::uint64_t content_seed = 0;
  int level = 0;
  SynthDistortion distortion;
  double mos = 0;
};

SynthDistortion distortion_for_level(int level, std::uint64_t noise_seed);
std::vector<CorpusClip> mini_corpus_plan(int contents, int levels, std::uint64_t seed);

// Content seeds reserved for pristine NIQE training, disjoint from the
// ones mini_corpus_plan hands out.
inline constexpr std::uint64_t kPristineSeedBase = 1u << 20;

}  // namespace hdrvqa

#endif  // HDRVQA_SYNTH_H_
