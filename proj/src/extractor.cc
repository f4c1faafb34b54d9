#include "hdrvqa/extractor.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hdrvqa/error.h"
#include "hdrvqa/feature_layout.h"
#include "hdrvqa/parallel.h"
#include "hdrvqa/temporal_pool.h"

namespace hdrvqa {

std::string ExtractorConfig::layout_version() const { return layout_for(patchmax.layout); }

std::size_t ExtractorConfig::width() const { return schema_for(layout_version()).width(); }

VideoFeatureExtractor::VideoFeatureExtractor(const ExtractorConfig& cfg)
    : cfg_(cfg), chips1_(cfg.stchips), chips2_(cfg.stchips) {
  cfg_.patchmax.validate();
  cfg_.hdrmax.validate();
  cfg_.niqe.validate();
  if (cfg_.threads == 0) cfg_.threads = default_thread_count();
}

VideoFeatureExtractor::~VideoFeatureExtractor() = default;

void VideoFeatureExtractor::push(FramePlane luma) {
  if (!pending_.empty() &&
      (luma.width() != pending_[0].width() || luma.height() != pending_[0].height())) {
    throw UsageError("frame size changed inside a video");
  }
  pending_.push_back(std::move(luma));
  ++frames_;
  if (pending_.size() >= cfg_.threads) flush();
}

void VideoFeatureExtractor::flush() {
  const std::size_t n = pending_.size();
  if (n == 0) return;
  struct PerFrame {
    std::vector<double> niqe, patchmax, hdrmax;
    int fallback = 0;
    FramePlane grad1, grad2;
  };
  std::vector<PerFrame> out(n);
  parallel_for(n, cfg_.threads, [&](std::size_t i) {
    const FramePlane& f = pending_[i];
    PerFrame& o = out[i];
    o.niqe = niqe_frame(f, cfg_.niqe).features;
    auto pm = patchmax_frame_features(f, cfg_.patchmax);
    o.patchmax = std::move(pm.features);
    o.fallback = pm.fallback_groups;
    o.hdrmax = hdrmax_frame_features(f, cfg_.hdrmax);
    o.grad1 = mscn_gradient(f, cfg_.stchips.mscn_c);
    o.grad2 = mscn_gradient(downscale2(f), cfg_.stchips.mscn_c);
  });
  for (auto& o : out) {
    niqe_rows_.push_back(std::move(o.niqe));
    patchmax_rows_.push_back(std::move(o.patchmax));
    hdrmax_rows_.push_back(std::move(o.hdrmax));
    fallback_groups_ += o.fallback;
    chips1_.push_mscn_gradient(std::move(o.grad1));
    chips2_.push_mscn_gradient(std::move(o.grad2));
  }
  pending_.clear();
}

std::vector<double> VideoFeatureExtractor::finish() {
  flush();
  if (frames_ < kStChipsMinFrames) {
    throw UsageError(fmt::format("feature extraction needs at least {} frames, got {}",
                                 kStChipsMinFrames, frames_));
  }
  if (fallback_groups_ > 0) {
    spdlog::warn("patchmax: {} empty contrast group(s) filled from the frame-global fit",
                 fallback_groups_);
  }
  std::vector<double> v;
  v.reserve(cfg_.width());
  std::vector<double> niqe(niqe_rows_.front().size(), 0.0);
  for (const auto& r : niqe_rows_) {
    for (std::size_t k = 0; k < r.size(); ++k) niqe[k] += r[k];
  }
  for (double& x : niqe) x /= static_cast<double>(niqe_rows_.size());
  v.insert(v.end(), niqe.begin(), niqe.end());

  const auto pm = patchmax_pool(patchmax_rows_, cfg_.patchmax);
  v.insert(v.end(), pm.begin(), pm.end());

  TemporalPool hm = temporal_pool(hdrmax_rows_);
  v.insert(v.end(), hm.mean.begin(), hm.mean.end());
  v.insert(v.end(), hm.tstd.begin(), hm.tstd.end());

  const auto c1 = chips1_.finish();
  const auto c2 = chips2_.finish();
  v.insert(v.end(), c1.begin(), c1.end());
  v.insert(v.end(), c2.begin(), c2.end());
  if (v.size() != cfg_.width()) {
    throw Error(fmt::format("internal: produced {} features for layout {} ({})", v.size(),
                            cfg_.layout_version(), cfg_.width()));
  }
  return v;
}

std::vector<double> extract_features(std::span<const FramePlane> frames, const ExtractorConfig& cfg) {
  VideoFeatureExtractor ex(cfg);
  for (const auto& f : frames) {
    if (cfg.max_frames && ex.frames_seen() >= *cfg.max_frames) break;
    ex.push(f);
  }
  return ex.finish();
}

std::vector<double> extract_video_features(const std::string& path, const VideoMeta& meta,
                                           const ExtractorConfig& cfg) {
  VideoReader reader(path, meta);
  VideoFeatureExtractor ex(cfg);
  while (!cfg.max_frames || ex.frames_seen() < *cfg.max_frames) {
    auto luma = reader.next_luma();
    if (!luma) break;
    ex.push(std::move(*luma));
  }
  return ex.finish();
}

}  // namespace hdrvqa
