#ifndef HDRVQA_MEDIA_IO_H_
#define HDRVQA_MEDIA_IO_H_

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hdrvqa {

// Single-channel raster of doubles, row-major.
class FramePlane {
 public:
  FramePlane() = default;
  FramePlane(int width, int height, double fill = 0.0);
  FramePlane(int width, int height, std::vector<double> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  double& at(int row, int col) { return samples_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const { return samples_[static_cast<std::size_t>(row) * width_ + col]; }
  double* row(int r) { return samples_.data() + static_cast<std::size_t>(r) * width_; }
  const double* row(int r) const { return samples_.data() + static_cast<std::size_t>(r) * width_; }

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  bool operator==(const FramePlane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

enum class PixelFormat { kYuv420p, kYuv420p10le };
enum class SampleRange { kLimited, kFull };
enum class Transfer { kPq, kBt709 };
enum class Gamut { kBt2020, kBt709 };

struct VideoMeta {
  int width = 0;
  int height = 0;
  int bit_depth = 10;
  PixelFormat pixel_format = PixelFormat::kYuv420p10le;
  double frame_rate = 30.0;
  SampleRange range = SampleRange::kLimited;
  Transfer transfer = Transfer::kPq;
  Gamut gamut = Gamut::kBt2020;

  int max_code() const { return (1 << bit_depth) - 1; }
  std::size_t bytes_per_sample() const { return bit_depth > 8 ? 2 : 1; }
  std::size_t luma_samples() const { return static_cast<std::size_t>(width) * height; }
  std::size_t chroma_samples() const {
    return static_cast<std::size_t>(width / 2) * (height / 2);
  }
  std::size_t frame_bytes() const {
    return (luma_samples() + 2 * chroma_samples()) * bytes_per_sample();
  }

  // Throws UsageError when fields are inconsistent (e.g. 8-bit with
  // yuv420p10le, odd dimensions, non-positive size).
  void validate() const;
};

// JSON sidecar keys: width, height, bit_depth, pixel_format, fps, range,
// transfer, gamut. Missing keys keep the defaults already in `base`.
VideoMeta meta_from_json(const nlohmann::json& j, VideoMeta base = {});
nlohmann::json meta_to_json(const VideoMeta& meta);

std::string to_string(PixelFormat f);
std::string to_string(SampleRange r);
std::string to_string(Transfer t);
std::string to_string(Gamut g);
PixelFormat parse_pixel_format(const std::string& s);
SampleRange parse_range(const std::string& s);
Transfer parse_transfer(const std::string& s);
Gamut parse_gamut(const std::string& s);

// One decoded frame. Samples are code / (2^bit_depth - 1); chroma planes
// are half resolution.
struct YuvFrame {
  FramePlane y;
  FramePlane u;
  FramePlane v;
  // Luma codes outside the nominal limited range. Always 0 for full range.
  std::size_t out_of_range_luma = 0;
};

// Sequential reader over a raw planar yuv420p / yuv420p10le file.
class VideoReader {
 public:
  // Throws FormatError if the file size is not a whole number of frames.
  VideoReader(const std::string& path, const VideoMeta& meta);

  const VideoMeta& meta() const { return meta_; }
  std::size_t frame_count() const { return frame_count_; }
  std::size_t position() const { return next_frame_; }

  // Next frame in file order, or nullopt at end of file.
  std::optional<YuvFrame> next();
  // Luma only; chroma bytes are skipped.
  std::optional<FramePlane> next_luma();

 private:
  void read_plane(FramePlane& out, int w, int h, std::size_t* out_of_range);

  std::string path_;
  VideoMeta meta_;
  std::ifstream in_;
  std::size_t frame_count_ = 0;
  std::size_t next_frame_ = 0;
  std::vector<unsigned char> buffer_;
};

// Decodes one frame from an in-memory buffer holding exactly
// meta.frame_bytes() bytes.
YuvFrame decode_frame(std::span<const unsigned char> bytes, const VideoMeta& meta);

// Inverse of the reader: writes normalized planes back as codes.
void encode_frame(const YuvFrame& frame, const VideoMeta& meta, std::vector<unsigned char>& out);
void write_video(const std::string& path, std::span<const YuvFrame> frames, const VideoMeta& meta);

// Reads every frame; intended for small clips and tests.
std::vector<YuvFrame> read_all_frames(const std::string& path, const VideoMeta& meta);

inline int code_from_normalized(double v, int bit_depth) {
  const int max_code = (1 << bit_depth) - 1;
  const double c = v * max_code;
  return static_cast<int>(c < 0 ? 0 : (c > max_code ? max_code : c + 0.5));
}

struct RgbPlanes {
  FramePlane r;
  FramePlane g;
  FramePlane b;
};

// Non-linear R'G'B' in [0, 1]. Chroma is upsampled nearest-neighbour.
RgbPlanes yuv_to_rgb(const FramePlane& y, const FramePlane& u, const FramePlane& v,
                     const VideoMeta& meta);

// 2x2 mean pooling; a trailing odd row/column is dropped.
FramePlane downscale2(const FramePlane& p);

}  // namespace hdrvqa

#endif  // HDRVQA_MEDIA_IO_H_
