#include "hdrvqa/media_io.h"

#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "hdrvqa/error.h"
#include "test_support.h"

namespace hdrvqa {
namespace {

using testing::TempDir;

VideoMeta meta8(int w, int h) {
  VideoMeta m;
  m.width = w;
  m.height = h;
  m.bit_depth = 8;
  m.pixel_format = PixelFormat::kYuv420p;
  return m;
}

VideoMeta meta10(int w, int h) {
  VideoMeta m;
  m.width = w;
  m.height = h;
  return m;
}

std::vector<unsigned char> constant_frame_bytes(const VideoMeta& m, int y_code, int c_code) {
  std::vector<unsigned char> out;
  auto put = [&](int code, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (m.bit_depth > 8) {
        out.push_back(static_cast<unsigned char>(code & 0xff));
        out.push_back(static_cast<unsigned char>(code >> 8));
      } else {
        out.push_back(static_cast<unsigned char>(code));
      }
    }
  };
  put(y_code, m.luma_samples());
  put(c_code, 2 * m.chroma_samples());
  return out;
}

TEST(Decode, EightBitConstantCode) {
  const VideoMeta m = meta8(4, 4);
  const YuvFrame f = decode_frame(constant_frame_bytes(m, 128, 128), m);
  ASSERT_EQ(f.y.width(), 4);
  ASSERT_EQ(f.u.width(), 2);
  for (double y : f.y.samples()) EXPECT_DOUBLE_EQ(y, 128.0 / 255.0);
  EXPECT_NEAR(f.y.at(0, 0), 0.50196, 1e-5);
}

TEST(Decode, TenBitConstantCode) {
  const VideoMeta m = meta10(4, 4);
  const YuvFrame f = decode_frame(constant_frame_bytes(m, 512, 512), m);
  for (double y : f.y.samples()) EXPECT_DOUBLE_EQ(y, 512.0 / 1023.0);
  EXPECT_NEAR(f.y.at(3, 3), 0.50049, 1e-5);
}

TEST(Decode, TenBitCodeAboveRangeIsRejected) {
  const VideoMeta m = meta10(4, 4);
  auto bytes = constant_frame_bytes(m, 512, 512);
  bytes[0] = 0xff;
  bytes[1] = 0x07;  // 2047
  EXPECT_THROW(decode_frame(bytes, m), FormatError);
}

TEST(Decode, CountsLumaOutsideLimitedRange) {
  const VideoMeta m = meta10(4, 4);
  auto bytes = constant_frame_bytes(m, 512, 512);
  bytes[0] = 10;  // code 10 < 64
  bytes[1] = 0;
  EXPECT_EQ(decode_frame(bytes, m).out_of_range_luma, 1u);
}

TEST(Reader, TruncatedFileIsRejected) {
  TempDir dir("media_trunc");
  const VideoMeta m = meta8(4, 4);
  const auto frame = constant_frame_bytes(m, 100, 128);
  {
    std::ofstream os(dir.file("half.yuv"), std::ios::binary);
    os.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    os.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size() / 2));
  }
  EXPECT_THROW(VideoReader(dir.file("half.yuv"), m), FormatError);
}

TEST(Reader, RoundTripsThroughWriter) {
  TempDir dir("media_rt");
  const VideoMeta m = meta10(8, 6);
  Rng rng(3);
  std::vector<YuvFrame> frames;
  for (int t = 0; t < 3; ++t) {
    YuvFrame f;
    f.y = FramePlane(8, 6);
    f.u = FramePlane(4, 3);
    f.v = FramePlane(4, 3);
    for (auto* p : {&f.y, &f.u, &f.v}) {
      for (double& x : p->samples()) x = static_cast<double>(rng.below(1024)) / 1023.0;
    }
    frames.push_back(f);
  }
  write_video(dir.file("rt.yuv"), frames, m);
  VideoReader reader(dir.file("rt.yuv"), m);
  EXPECT_EQ(reader.frame_count(), 3u);
  for (int t = 0; t < 3; ++t) {
    auto f = reader.next();
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->y, frames[t].y);
    EXPECT_EQ(f->u, frames[t].u);
    EXPECT_EQ(f->v, frames[t].v);
  }
  EXPECT_FALSE(reader.next().has_value());
}

TEST(Reader, LumaOnlyMatchesFullDecode) {
  TempDir dir("media_luma");
  const VideoMeta m = meta8(6, 4);
  Rng rng(5);
  std::vector<YuvFrame> frames(2);
  for (auto& f : frames) {
    f.y = testing::random_plane(rng, 6, 4);
    f.u = testing::random_plane(rng, 3, 2);
    f.v = testing::random_plane(rng, 3, 2);
  }
  write_video(dir.file("l.yuv"), frames, m);
  const auto all = read_all_frames(dir.file("l.yuv"), m);
  VideoReader reader(dir.file("l.yuv"), m);
  for (const auto& f : all) {
    auto y = reader.next_luma();
    ASSERT_TRUE(y.has_value());
    EXPECT_EQ(*y, f.y);
  }
}

TEST(Meta, ValidateRejectsInconsistentFields) {
  VideoMeta m = meta8(4, 4);
  m.pixel_format = PixelFormat::kYuv420p10le;
  EXPECT_THROW(m.validate(), UsageError);
  VideoMeta odd = meta10(5, 4);
  EXPECT_THROW(odd.validate(), UsageError);
  VideoMeta empty = meta10(0, 4);
  EXPECT_THROW(empty.validate(), UsageError);
}

TEST(Meta, JsonRoundTrip) {
  VideoMeta m = meta8(16, 8);
  m.range = SampleRange::kFull;
  m.transfer = Transfer::kBt709;
  m.gamut = Gamut::kBt709;
  m.frame_rate = 25;
  const VideoMeta back = meta_from_json(meta_to_json(m));
  EXPECT_EQ(back.width, 16);
  EXPECT_EQ(back.height, 8);
  EXPECT_EQ(back.bit_depth, 8);
  EXPECT_EQ(back.pixel_format, PixelFormat::kYuv420p);
  EXPECT_EQ(back.range, SampleRange::kFull);
  EXPECT_EQ(back.transfer, Transfer::kBt709);
  EXPECT_EQ(back.gamut, Gamut::kBt709);
  EXPECT_DOUBLE_EQ(back.frame_rate, 25);
}

TEST(Meta, UnknownPixelFormatIsUsageError) {
  EXPECT_THROW(parse_pixel_format("nv12"), UsageError);
  EXPECT_THROW(meta_from_json(nlohmann::json{{"width", "wide"}}), UsageError);
}

TEST(Rgb, FullRangeGrayIsAchromatic) {
  VideoMeta m = meta8(4, 4);
  m.range = SampleRange::kFull;
  const FramePlane y(4, 4, 0.5), c(2, 2, 128.0 / 255.0);
  const RgbPlanes rgb = yuv_to_rgb(y, c, c, m);
  for (const auto* p : {&rgb.r, &rgb.g, &rgb.b}) {
    for (double x : p->samples()) EXPECT_NEAR(x, 0.5, 1e-6);
  }
}

TEST(Rgb, LimitedRangeBlackIsZero) {
  const VideoMeta m = meta10(4, 4);
  const FramePlane y(4, 4, 64.0 / 1023.0), c(2, 2, 512.0 / 1023.0);
  const RgbPlanes rgb = yuv_to_rgb(y, c, c, m);
  for (const auto* p : {&rgb.r, &rgb.g, &rgb.b}) {
    for (double x : p->samples()) EXPECT_NEAR(x, 0.0, 1e-12);
  }
}

TEST(Rgb, PeakLumaIsWhite) {
  VideoMeta full = meta10(4, 4);
  full.range = SampleRange::kFull;
  const FramePlane y(4, 4, 1.0), c(2, 2, 512.0 / 1023.0);
  RgbPlanes rgb = yuv_to_rgb(y, c, c, full);
  for (const auto* p : {&rgb.r, &rgb.g, &rgb.b}) {
    for (double x : p->samples()) EXPECT_NEAR(x, 1.0, 1e-12);
  }
  const VideoMeta limited = meta10(4, 4);
  rgb = yuv_to_rgb(FramePlane(4, 4, 940.0 / 1023.0), c, c, limited);
  for (const auto* p : {&rgb.r, &rgb.g, &rgb.b}) {
    for (double x : p->samples()) EXPECT_NEAR(x, 1.0, 1e-12);
  }
}

TEST(Downscale, ConstantStaysConstant) {
  const FramePlane d = downscale2(FramePlane(8, 6, 0.3));
  EXPECT_EQ(d.width(), 4);
  EXPECT_EQ(d.height(), 3);
  for (double x : d.samples()) EXPECT_DOUBLE_EQ(x, 0.3);
}

TEST(Downscale, AveragesTwoByTwo) {
  const FramePlane d = downscale2(FramePlane(2, 2, {0, 1, 1, 0}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 0.5);
}

TEST(Downscale, DropsOddTrailingRowAndColumn) {
  const FramePlane d = downscale2(FramePlane(3, 3, {1, 2, 9, 3, 4, 9, 9, 9, 9}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 2.5);
}

}  // namespace
}  // namespace hdrvqa
