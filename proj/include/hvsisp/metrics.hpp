#pragma once

#include <array>
#include <span>
#include <vector>

#include "hvsisp/color.hpp"
#include "hvsisp/types.hpp"

namespace hvsisp {

// 10 * log10(peak^2 / MSE) over all channels; +infinity when MSE == 0.
double psnr(const RgbImage& a, const RgbImage& b, double peak = 1.0);

// Gaussian-windowed SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1),
// computed per channel over valid windows and averaged.
double ssim(const RgbImage& a, const RgbImage& b);

// Mean absolute difference over all samples.
double l1(const RgbImage& a, const RgbImage& b);

struct ColorAccuracyReport {
  struct FrameErrors {
    std::array<double, 24> de00{};
    std::array<double, 24> de_ab{};
  };
  std::vector<FrameErrors> frames;
  double mean_de00 = 0.0, median_de00 = 0.0, mean_max_de00 = 0.0;
  double mean_de_ab = 0.0, median_de_ab = 0.0, mean_max_de_ab = 0.0;
};

// Per-frame per-patch color errors of encoded-sRGB frames against a linear
// reference, with mean / median / mean-of-per-image-maxima aggregates.
ColorAccuracyReport color_accuracy(std::span<const RgbImage> frames,
                                   std::span<const CheckerAnnotation> anns,
                                   const PatchColors& reference);

struct StabilityReport {
  // series[t][patch][channel]: encoded-sRGB patch means, one entry per frame.
  std::vector<std::array<std::array<double, 3>, 24>> series;
  // Max |v(t+1) - v(t)| per patch over channels and time.
  std::array<double, 24> max_frame_diff{};
};

// Frame-to-frame fluctuation of encoded patch values across >= 2 frames.
StabilityReport temporal_stability(std::span<const RgbImage> frames,
                                   std::span<const CheckerAnnotation> anns);

}  // namespace hvsisp
