#pragma once

#include <array>
#include <string>

#include "hvsisp/types.hpp"

namespace hvsisp {

// Patch centers for the 4x6 grid, index 0..23 = checker patches 1..24,
// bilinearly interpolated from the four labeled corner-patch centers
// (brown = row 1 col 1, cyan = row 1 col 6, white = row 4 col 1,
// black = row 4 col 6).
std::array<ImagePoint, 24> patch_centers(const CheckerAnnotation& ann);

// Mean color over a square window centered on each patch center; window
// side = max(3 px, 25% of the inter-center spacing), clipped to the image.
PatchColors extract_patches(const RgbImage& linear_img,
                            const std::array<ImagePoint, 24>& centers);

// Gains from the 21st patch (second gray step): g = G21 / {R21, B21}.
WbGains estimate_wb(const PatchColors& patches, double eps = 1e-4);

// Per-channel multiply, clamped to [0, 1].
RgbImage apply_wb(RgbImage img, const WbGains& gains);

// Linear sRGB (D65) -> CIELAB (D65, 2 degrees).
LabColor linear_to_lab(double r, double g, double b);
LabColor linear_to_lab(const std::array<double, 3>& rgb);

// CIEDE2000 with kL = kC = kH = 1.
double ciede2000(const LabColor& a, const LabColor& b);

// Euclidean distance in Lab.
double delta_e_ab(const LabColor& a, const LabColor& b);

struct FitReport {
  double initial_objective = 0.0;  // at the least-squares start
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool exposure_normalized = false;
  std::string notes;  // e.g. objective evaluated on clamped corrected colors
};

struct FitOptions {
  bool white_preserve = false;     // constrain rows to sum to 1
  bool exposure_normalize = true;  // match patch-21 luminance before fitting
  int max_iterations = 2000;
  double tolerance = 1e-6;  // simplex objective spread
};

// Mean CIEDE2000 over the 24 patches of clamp01(measured * M) vs reference.
double ccm_objective(const PatchColors& measured, const PatchColors& reference,
                     const Ccm& ccm);

// Least-squares initialization refined by Nelder-Mead on the CIEDE2000
// objective. Deterministic; the returned matrix never scores worse than the
// initialization.
Ccm fit_ccm(const PatchColors& measured, const PatchColors& reference,
            const FitOptions& options = {}, FitReport* report = nullptr);

// Per-pixel row-vector multiply, clamped to [0, 1].
RgbImage apply_ccm(RgbImage img, const Ccm& ccm);

// IEC 61966-2-1 piecewise transfer curve.
double srgb_encode(double linear);
double srgb_decode(double encoded);
RgbImage srgb_encode_image(RgbImage img);
RgbImage srgb_decode_image(RgbImage img);

// Joint overexposure clip: any channel >= fraction forces the pixel to white.
RgbImage highlight_clip(RgbImage img, double saturation_fraction = 0.95);

}  // namespace hvsisp
