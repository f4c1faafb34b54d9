#ifndef HDRVQA_FR_METRICS_H_
#define HDRVQA_FR_METRICS_H_

#include <span>
#include <vector>

#include "hdrvqa/media_io.h"

namespace hdrvqa {

// Full-reference baselines on normalized luma (peak 1.0).

inline constexpr double kPsnrCap = 100.0;

double psnr_frame(const FramePlane& ref, const FramePlane& dist, double cap = kPsnrCap);

// 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 1; mean of
// the SSIM map over window positions fully inside the frame.
double ssim_frame(const FramePlane& ref, const FramePlane& dist);

struct FrScores {
  std::vector<double> psnr;  // per frame
  std::vector<double> ssim;  // per frame
  double mean_psnr = 0;
  double mean_ssim = 0;
};

// Frame lists must agree in count and size.
FrScores full_reference(std::span<const FramePlane> ref, std::span<const FramePlane> dist,
                        unsigned threads = 1);

double psnr(std::span<const FramePlane> ref, std::span<const FramePlane> dist);
double ssim(std::span<const FramePlane> ref, std::span<const FramePlane> dist);

}  // namespace hdrvqa

#endif  // HDRVQA_FR_METRICS_H_
