#include "hdrvqa/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdrvqa/nss.h"
#include "hdrvqa/rng.h"

namespace hdrvqa {

namespace {

struct Grating {
  double kx, ky, phase, amp;
};

struct Highlight {
  double x, y, vx, vy, radius, gain;
};

struct Scene {
  std::vector<Grating> gratings;
  std::vector<Highlight> highlights;
  double vx = 0, vy = 0;
  double ramp_angle = 0;
  double tex_norm = 1;
};

Scene make_scene(std::uint64_t seed, int width, int height) {
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 17);
  Scene s;
  constexpr int kGratings = 48;
  const double fmax = std::max(2.0, std::min(width, height) / 4.0);
  double power = 0;
  for (int k = 0; k < kGratings; ++k) {
    const double f = std::exp(rng.uniform() * std::log(fmax));  // cycles per frame width
    const double theta = rng.uniform() * std::numbers::pi;
    const double w = 2 * std::numbers::pi * f / width;
    Grating g{w * std::cos(theta), w * std::sin(theta), 2 * std::numbers::pi * rng.uniform(), 1.0 / f};
    power += g.amp * g.amp / 2;
    s.gratings.push_back(g);
  }
  s.tex_norm = 1.0 / std::sqrt(power);
  s.vx = 0.5 + 1.5 * rng.uniform();
  s.vy = -1.0 + 2.0 * rng.uniform();
  s.ramp_angle = 2 * std::numbers::pi * rng.uniform();
  for (int k = 0; k < 3; ++k) {
    s.highlights.push_back({rng.uniform() * width, rng.uniform() * height, -1 + 2 * rng.uniform(),
                            -1 + 2 * rng.uniform(), (0.04 + 0.06 * rng.uniform()) * width,
                            0.15 + 0.2 * rng.uniform()});
  }
  return s;
}

}  // namespace

VideoMeta synth_meta(int width, int height) {
  VideoMeta m;
  m.width = width;
  m.height = height;
  m.bit_depth = 10;
  m.pixel_format = PixelFormat::kYuv420p10le;
  m.frame_rate = 30;
  m.range = SampleRange::kLimited;
  m.transfer = Transfer::kPq;
  m.gamut = Gamut::kBt2020;
  return m;
}

FramePlane synth_luma_codes(std::uint64_t content_seed, int width, int height, int t, int bit_depth) {
  const Scene s = make_scene(content_seed, width, height);
  const double lo = 16.0 * (1 << (bit_depth - 8)), hi = 235.0 * (1 << (bit_depth - 8));
  const double ca = std::cos(s.ramp_angle), sa = std::sin(s.ramp_angle);
  const double diag = std::abs(ca) * width + std::abs(sa) * height;
  FramePlane out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double xs = x - s.vx * t, ys = y - s.vy * t;
      double tex = 0;
      for (const auto& g : s.gratings) tex += g.amp * std::sin(g.kx * xs + g.ky * ys + g.phase);
      tex *= s.tex_norm;
      const double ramp = ((x - width / 2.0) * ca + (y - height / 2.0) * sa) / diag + 0.5;
      double v = 0.12 + 0.45 * ramp + 0.06 * tex;
      for (const auto& h : s.highlights) {
        const double dx = x - (h.x + h.vx * t), dy = y - (h.y + h.vy * t);
        const double d = std::sqrt(dx * dx + dy * dy) / h.radius;
        v += h.gain / (1 + std::exp(8 * (d - 1)));
      }
      v = std::clamp(v, 0.0, 1.0);
      out.at(y, x) = lo + v * (hi - lo);
    }
  }
  return out;
}

FramePlane gaussian_blur(const FramePlane& p, double sigma) {
  if (sigma <= 0) return p;
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> taps(2 * r + 1);
  double sum = 0;
  for (int k = -r; k <= r; ++k) sum += taps[k + r] = std::exp(-0.5 * k * k / (sigma * sigma));
  for (double& t : taps) t /= sum;
  const int w = p.width(), h = p.height();
  FramePlane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double a = 0;
      for (int k = -r; k <= r; ++k) a += taps[k + r] * p.at(y, reflect_index(x + k, w));
      tmp.at(y, x) = a;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double a = 0;
      for (int k = -r; k <= r; ++k) a += taps[k + r] * tmp.at(reflect_index(y + k, h), x);
      out.at(y, x) = a;
    }
  }
  return out;
}

YuvFrame synth_frame(std::uint64_t content_seed, const VideoMeta& meta, int t, const SynthDistortion& d) {
  meta.validate();
  const int max_code = meta.max_code();
  FramePlane codes = gaussian_blur(synth_luma_codes(content_seed, meta.width, meta.height, t, meta.bit_depth),
                                   d.blur_sigma);
  Rng rng(d.noise_seed * 1000003ULL + static_cast<std::uint64_t>(t));
  YuvFrame f;
  f.y = FramePlane(meta.width, meta.height);
  for (int y = 0; y < meta.height; ++y) {
    for (int x = 0; x < meta.width; ++x) {
      double c = codes.at(y, x);
      if (d.noise_std > 0) c += d.noise_std * normal_draw(rng);
      long q = std::lround(c);
      if (d.quant_step > 1) q = std::lround(static_cast<double>(q) / d.quant_step) * d.quant_step;
      f.y.at(y, x) = static_cast<double>(std::clamp<long>(q, 0, max_code)) / max_code;
    }
  }
  const int cw = meta.width / 2, ch = meta.height / 2;
  f.u = FramePlane(cw, ch);
  f.v = FramePlane(cw, ch);
  const double mid = (1 << (meta.bit_depth - 1));
  const double swing = 0.12 * (1 << meta.bit_depth);
  const double phase = static_cast<double>(content_seed % 97);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const double u = mid + swing * std::sin(0.05 * x + 0.02 * t + phase);
      const double v = mid + swing * std::cos(0.04 * y - 0.03 * t + 0.5 * phase);
      f.u.at(y, x) = std::round(u) / max_code;
      f.v.at(y, x) = std::round(v) / max_code;
    }
  }
  return f;
}

std::vector<YuvFrame> synth_clip(std::uint64_t content_seed, const VideoMeta& meta, int frames,
                                 const SynthDistortion& d) {
  std::vector<YuvFrame> clip;
  clip.reserve(frames);
  for (int t = 0; t < frames; ++t) clip.push_back(synth_frame(content_seed, meta, t, d));
  return clip;
}

std::vector<FramePlane> luma_planes(const std::vector<YuvFrame>& clip) {
  std::vector<FramePlane> out;
  out.reserve(clip.size());
  for (const auto& f : clip) out.push_back(f.y);
  return out;
}

SynthDistortion distortion_for_level(int level, std::uint64_t noise_seed) {
  SynthDistortion d;
  d.blur_sigma = 0.6 * level;
  d.noise_std = 1.5 * level;
  d.noise_seed = noise_seed;
  return d;
}

std::vector<CorpusClip> mini_corpus_plan(int contents, int levels, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CorpusClip> plan;
  for (int c = 0; c < contents; ++c) {
    for (int k = 0; k < levels; ++k) {
      CorpusClip clip;
      clip.video_id = "c" + std::to_string(c) + "_d" + std::to_string(k);
      clip.content_id = "c" + std::to_string(c);
      clip.content_seed = seed * 7919 + static_cast<std::uint64_t>(c);
      clip.level = k;
      clip.distortion = distortion_for_level(k, seed * 104729 + static_cast<std::uint64_t>(c * levels + k));
      clip.mos = 85.0 - 14.0 * k + 3.0 * normal_draw(rng);
      plan.push_back(std::move(clip));
    }
  }
  return plan;
}

}  // namespace hdrvqa
