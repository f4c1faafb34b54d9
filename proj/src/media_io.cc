#include "hdrvqa/media_io.h"

#include <algorithm>
#include <filesystem>

#include <fmt/format.h>

#include "hdrvqa/error.h"

namespace hdrvqa {

FramePlane::FramePlane(int width, int height, double fill)
    : width_(width), height_(height),
      samples_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {}

FramePlane::FramePlane(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (samples_.size() != static_cast<std::size_t>(width) * height) {
    throw UsageError(fmt::format("plane {}x{} given {} samples", width, height, samples_.size()));
  }
}

void VideoMeta::validate() const {
  if (width <= 0 || height <= 0) {
    throw UsageError(fmt::format("invalid frame size {}x{}", width, height));
  }
  if (width % 2 != 0 || height % 2 != 0) {
    throw UsageError(fmt::format("4:2:0 input needs even dimensions, got {}x{}", width, height));
  }
  if (bit_depth != 8 && bit_depth != 10) {
    throw UsageError(fmt::format("unsupported bit depth {}", bit_depth));
  }
  if ((pixel_format == PixelFormat::kYuv420p) != (bit_depth == 8)) {
    throw UsageError(fmt::format("pixel format {} does not match bit depth {}",
                                 to_string(pixel_format), bit_depth));
  }
  if (!(frame_rate > 0)) throw UsageError("frame rate must be positive");
}

std::string to_string(PixelFormat f) {
  return f == PixelFormat::kYuv420p ? "yuv420p" : "yuv420p10le";
}
std::string to_string(SampleRange r) { return r == SampleRange::kLimited ? "limited" : "full"; }
std::string to_string(Transfer t) { return t == Transfer::kPq ? "pq" : "bt709"; }
std::string to_string(Gamut g) { return g == Gamut::kBt2020 ? "bt2020" : "bt709"; }

PixelFormat parse_pixel_format(const std::string& s) {
  if (s == "yuv420p") return PixelFormat::kYuv420p;
  if (s == "yuv420p10le") return PixelFormat::kYuv420p10le;
  throw UsageError(fmt::format("unsupported pixel_format '{}'", s));
}
SampleRange parse_range(const std::string& s) {
  if (s == "limited" || s == "tv") return SampleRange::kLimited;
  if (s == "full" || s == "pc") return SampleRange::kFull;
  throw UsageError(fmt::format("unknown range '{}'", s));
}
Transfer parse_transfer(const std::string& s) {
  if (s == "pq" || s == "smpte2084") return Transfer::kPq;
  if (s == "bt709" || s == "sdr") return Transfer::kBt709;
  throw UsageError(fmt::format("unknown transfer '{}'", s));
}
Gamut parse_gamut(const std::string& s) {
  if (s == "bt2020") return Gamut::kBt2020;
  if (s == "bt709") return Gamut::kBt709;
  throw UsageError(fmt::format("unknown gamut '{}'", s));
}

VideoMeta meta_from_json(const nlohmann::json& j, VideoMeta base) {
  try {
    if (j.contains("width")) base.width = j.at("width").get<int>();
    if (j.contains("height")) base.height = j.at("height").get<int>();
    if (j.contains("pixel_format")) {
      base.pixel_format = parse_pixel_format(j.at("pixel_format").get<std::string>());
      base.bit_depth = base.pixel_format == PixelFormat::kYuv420p ? 8 : 10;
    }
    if (j.contains("bit_depth")) base.bit_depth = j.at("bit_depth").get<int>();
    if (j.contains("fps")) base.frame_rate = j.at("fps").get<double>();
    if (j.contains("range")) base.range = parse_range(j.at("range").get<std::string>());
    if (j.contains("transfer")) base.transfer = parse_transfer(j.at("transfer").get<std::string>());
    if (j.contains("gamut")) base.gamut = parse_gamut(j.at("gamut").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("bad metadata sidecar: {}", e.what()));
  }
  return base;
}

nlohmann::json meta_to_json(const VideoMeta& meta) {
  return {{"width", meta.width},
          {"height", meta.height},
          {"bit_depth", meta.bit_depth},
          {"pixel_format", to_string(meta.pixel_format)},
          {"fps", meta.frame_rate},
          {"range", to_string(meta.range)},
          {"transfer", to_string(meta.transfer)},
          {"gamut", to_string(meta.gamut)}};
}

namespace {

void decode_plane(const unsigned char* src, const VideoMeta& meta, FramePlane& out,
                  std::size_t* out_of_range) {
  const std::size_t n = out.size();
  const double max_code = meta.max_code();
  auto dst = out.samples();
  const int lo = 16 << (meta.bit_depth - 8);
  const int hi = 235 << (meta.bit_depth - 8);
  std::size_t flagged = 0;
  if (meta.bit_depth == 8) {
    for (std::size_t i = 0; i < n; ++i) {
      const int code = src[i];
      flagged += (code < lo || code > hi);
      dst[i] = code / max_code;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int code = src[2 * i] | (src[2 * i + 1] << 8);
      if (code > meta.max_code()) {
        throw FormatError(fmt::format("sample code {} exceeds {}-bit range", code, meta.bit_depth));
      }
      flagged += (code < lo || code > hi);
      dst[i] = code / max_code;
    }
  }
  if (out_of_range != nullptr && meta.range == SampleRange::kLimited) *out_of_range += flagged;
}

}  // namespace

YuvFrame decode_frame(std::span<const unsigned char> bytes, const VideoMeta& meta) {
  if (bytes.size() != meta.frame_bytes()) {
    throw FormatError(fmt::format("frame buffer holds {} bytes, expected {}", bytes.size(),
                                  meta.frame_bytes()));
  }
  YuvFrame f{FramePlane(meta.width, meta.height), FramePlane(meta.width / 2, meta.height / 2),
             FramePlane(meta.width / 2, meta.height / 2), 0};
  const std::size_t bps = meta.bytes_per_sample();
  const unsigned char* p = bytes.data();
  decode_plane(p, meta, f.y, &f.out_of_range_luma);
  p += meta.luma_samples() * bps;
  decode_plane(p, meta, f.u, nullptr);
  p += meta.chroma_samples() * bps;
  decode_plane(p, meta, f.v, nullptr);
  return f;
}

void encode_frame(const YuvFrame& frame, const VideoMeta& meta, std::vector<unsigned char>& out) {
  out.resize(meta.frame_bytes());
  std::size_t k = 0;
  for (const FramePlane* plane : {&frame.y, &frame.u, &frame.v}) {
    for (double s : plane->samples()) {
      const int code = code_from_normalized(s, meta.bit_depth);
      if (meta.bit_depth == 8) {
        out[k++] = static_cast<unsigned char>(code);
      } else {
        out[k++] = static_cast<unsigned char>(code & 0xff);
        out[k++] = static_cast<unsigned char>(code >> 8);
      }
    }
  }
  if (k != out.size()) {
    throw UsageError(fmt::format("frame planes hold {} bytes, metadata implies {}", k, out.size()));
  }
}

void write_video(const std::string& path, std::span<const YuvFrame> frames, const VideoMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot open '{}' for writing", path));
  std::vector<unsigned char> buf;
  for (const auto& f : frames) {
    encode_frame(f, meta, buf);
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw Error(fmt::format("write to '{}' failed", path));
}

VideoReader::VideoReader(const std::string& path, const VideoMeta& meta)
    : path_(path), meta_(meta) {
  meta_.validate();
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw Error(fmt::format("cannot stat '{}': {}", path, ec.message()));
  const std::size_t per_frame = meta_.frame_bytes();
  if (bytes % per_frame != 0) {
    const std::size_t whole = bytes / per_frame;
    throw FormatError(fmt::format(
        "'{}' is truncated: {} bytes is not a multiple of the {}-byte frame size "
        "(expected {} or {} bytes)",
        path, bytes, per_frame, whole * per_frame, (whole + 1) * per_frame));
  }
  frame_count_ = bytes / per_frame;
  in_.open(path, std::ios::binary);
  if (!in_) throw Error(fmt::format("cannot open '{}'", path));
}

std::optional<YuvFrame> VideoReader::next() {
  if (next_frame_ >= frame_count_) return std::nullopt;
  buffer_.resize(meta_.frame_bytes());
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buffer_.size())) {
    throw FormatError(fmt::format("short read in '{}' at frame {}", path_, next_frame_));
  }
  ++next_frame_;
  return decode_frame(buffer_, meta_);
}

std::optional<FramePlane> VideoReader::next_luma() {
  auto f = next();
  if (!f) return std::nullopt;
  return std::move(f->y);
}

std::vector<YuvFrame> read_all_frames(const std::string& path, const VideoMeta& meta) {
  VideoReader reader(path, meta);
  std::vector<YuvFrame> frames;
  frames.reserve(reader.frame_count());
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

RgbPlanes yuv_to_rgb(const FramePlane& y, const FramePlane& u, const FramePlane& v,
                     const VideoMeta& meta) {
  if (u.width() != v.width() || u.height() != v.height() || u.width() != (y.width() + 1) / 2 ||
      u.height() != (y.height() + 1) / 2) {
    throw UsageError(fmt::format("chroma planes {}x{} / {}x{} do not match luma {}x{}", u.width(),
                                 u.height(), v.width(), v.height(), y.width(), y.height()));
  }
  const double kr = meta.gamut == Gamut::kBt2020 ? 0.2627 : 0.2126;
  const double kb = meta.gamut == Gamut::kBt2020 ? 0.0593 : 0.0722;
  const double kg = 1.0 - kr - kb;
  const double max_code = meta.max_code();
  const double s = static_cast<double>(1 << (meta.bit_depth - 8));
  // Per-sample affine maps from normalized value to Y' in [0,1] and
  // Cb/Cr in [-0.5, 0.5].
  double y_gain, y_off, c_gain, c_off;
  if (meta.range == SampleRange::kLimited) {
    y_gain = max_code / (219.0 * s);
    y_off = -16.0 / 219.0;
    c_gain = max_code / (224.0 * s);
    c_off = -128.0 / 224.0;
  } else {
    y_gain = 1.0;
    y_off = 0.0;
    c_gain = 1.0;
    c_off = -static_cast<double>(1 << (meta.bit_depth - 1)) / max_code;
  }
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  RgbPlanes out{FramePlane(y.width(), y.height()), FramePlane(y.width(), y.height()),
                FramePlane(y.width(), y.height())};
  for (int r = 0; r < y.height(); ++r) {
    const double* yr = y.row(r);
    const double* ur = u.row(r / 2);
    const double* vr = v.row(r / 2);
    for (int c = 0; c < y.width(); ++c) {
      const double luma = yr[c] * y_gain + y_off;
      const double cb = ur[c / 2] * c_gain + c_off;
      const double cr = vr[c / 2] * c_gain + c_off;
      const double red = luma + 2.0 * (1.0 - kr) * cr;
      const double blue = luma + 2.0 * (1.0 - kb) * cb;
      const double green = (luma - kr * red - kb * blue) / kg;
      out.r.at(r, c) = clamp01(red);
      out.g.at(r, c) = clamp01(green);
      out.b.at(r, c) = clamp01(blue);
    }
  }
  return out;
}

FramePlane downscale2(const FramePlane& p) {
  if (p.width() < 2 || p.height() < 2) {
    throw UsageError(fmt::format("cannot downscale a {}x{} plane", p.width(), p.height()));
  }
  const int w = p.width() / 2;
  const int h = p.height() / 2;
  FramePlane out(w, h);
  for (int r = 0; r < h; ++r) {
    const double* a = p.row(2 * r);
    const double* b = p.row(2 * r + 1);
    double* o = out.row(r);
    for (int c = 0; c < w; ++c) {
      o[c] = 0.25 * ((a[2 * c] + a[2 * c + 1]) + (b[2 * c] + b[2 * c + 1]));
    }
  }
  return out;
}

}  // namespace hdrvqa
