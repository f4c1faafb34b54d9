#ifndef HDRVQA_EXTRACTOR_H_
#define HDRVQA_EXTRACTOR_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdrvqa/hdrmax.h"
#include "hdrvqa/media_io.h"
#include "hdrvqa/niqe.h"
#include "hdrvqa/patchmax.h"
#include "hdrvqa/st_chips.h"

namespace hdrvqa {

struct ExtractorConfig {
  NiqePristineModel niqe;
  PatchMaxConfig patchmax;
  HdrMaxConfig hdrmax;
  StChipsConfig stchips;
  unsigned threads = 1;
  // Stop after this many frames when set.
  std::optional<std::size_t> max_frames;

  std::string layout_version() const;
  std::size_t width() const;
};

// Streams luma frames through all four banks. Frames are buffered in
// chunks of `threads` and processed frame-parallel; everything that
// crosses frames is reduced in frame order, so the result does not depend
// on the thread count.
class VideoFeatureExtractor {
 public:
  explicit VideoFeatureExtractor(const ExtractorConfig& cfg);
  ~VideoFeatureExtractor();

  void push(FramePlane luma);
  // Needs at least 9 frames (the spatio-temporal bank's minimum).
  std::vector<double> finish();
  std::size_t frames_seen() const { return frames_; }

 private:
  void flush();

  ExtractorConfig cfg_;
  std::vector<FramePlane> pending_;
  std::vector<std::vector<double>> niqe_rows_, patchmax_rows_, hdrmax_rows_;
  StChipsScaleAccumulator chips1_, chips2_;
  std::size_t frames_ = 0;
  int fallback_groups_ = 0;
};

std::vector<double> extract_features(std::span<const FramePlane> frames, const ExtractorConfig& cfg);
std::vector<double> extract_video_features(const std::string& path, const VideoMeta& meta,
                                           const ExtractorConfig& cfg);

}  // namespace hdrvqa

#endif  // HDRVQA_EXTRACTOR_H_
