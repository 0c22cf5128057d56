#include "hvsisp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hvsisp/errors.hpp"

namespace hvsisp {

namespace {

void require_same_shape(const RgbImage& a, const RgbImage& b, const char* op) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError(std::string(op) + ": image shapes differ: " +
                     std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height));
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b, double peak) {
  require_same_shape(a, b, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const RgbImage& a, const RgbImage& b) {
  require_same_shape(a, b, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
  constexpr double kC2 = 0.03 * 0.03;
  if (a.width < kWin || a.height < kWin) {
    throw ShapeError("ssim: image smaller than the 11x11 window");
  }

  double weights[kWin][kWin];
  double wsum = 0.0;
  for (int y = 0; y < kWin; ++y) {
    for (int x = 0; x < kWin; ++x) {
      const double dx = x - kWin / 2, dy = y - kWin / 2;
      weights[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      wsum += weights[y][x];
    }
  }
  for (auto& row : weights) {
    for (double& w : row) w /= wsum;
  }

  double total = 0.0;
  std::size_t windows = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y0 = 0; y0 + kWin <= a.height; ++y0) {
      for (int x0 = 0; x0 + kWin <= a.width; ++x0) {
        double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
        for (int y = 0; y < kWin; ++y) {
          for (int x = 0; x < kWin; ++x) {
            const double w = weights[y][x];
            const double va = a.pixel(x0 + x, y0 + y)[c];
            const double vb = b.pixel(x0 + x, y0 + y)[c];
            mx += w * va;
            my += w * vb;
            xx += w * va * va;
            yy += w * vb * vb;
            xy += w * va * vb;
          }
        }
        const double sx = xx - mx * mx;
        const double sy = yy - my * my;
        const double sxy = xy - mx * my;
        total += ((2.0 * mx * my + kC1) * (2.0 * sxy + kC2)) /
                 ((mx * mx + my * my + kC1) * (sx + sy + kC2));
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

double l1(const RgbImage& a, const RgbImage& b) {
  require_same_shape(a, b, "l1");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  }
  return sum / static_cast<double>(a.data.size());
}

ColorAccuracyReport color_accuracy(std::span<const RgbImage> frames,
                                   std::span<const CheckerAnnotation> anns,
                                   const PatchColors& reference) {
  if (frames.empty()) throw EmptyInputError("color_accuracy: no frames");
  if (frames.size() != anns.size()) {
    throw ShapeError("color_accuracy: frame/annotation count mismatch");
  }
  reference.validate();

  std::array<LabColor, 24> ref_lab;
  for (int i = 0; i < 24; ++i) ref_lab[i] = linear_to_lab(reference.rgb[i]);

  ColorAccuracyReport report;
  std::vector<double> all00, all_ab;
  double max00_sum = 0.0, max_ab_sum = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto centers = patch_centers(anns[f]);
    const PatchColors patches =
        extract_patches(srgb_decode_image(frames[f]), centers);
    ColorAccuracyReport::FrameErrors errs;
    double max00 = 0.0, max_ab = 0.0;
    for (int i = 0; i < 24; ++i) {
      const LabColor lab = linear_to_lab(patches.rgb[i]);
      errs.de00[i] = ciede2000(lab, ref_lab[i]);
      errs.de_ab[i] = delta_e_ab(lab, ref_lab[i]);
      all00.push_back(errs.de00[i]);
      all_ab.push_back(errs.de_ab[i]);
      max00 = std::max(max00, errs.de00[i]);
      max_ab = std::max(max_ab, errs.de_ab[i]);
    }
    max00_sum += max00;
    max_ab_sum += max_ab;
    report.frames.push_back(errs);
  }

  const double n = static_cast<double>(all00.size());
  double s00 = 0.0, s_ab = 0.0;
  for (double v : all00) s00 += v;
  for (double v : all_ab) s_ab += v;
  report.mean_de00 = s00 / n;
  report.mean_de_ab = s_ab / n;
  report.median_de00 = median_of(all00);
  report.median_de_ab = median_of(all_ab);
  report.mean_max_de00 = max00_sum / static_cast<double>(frames.size());
  report.mean_max_de_ab = max_ab_sum / static_cast<double>(frames.size());
  return report;
}

StabilityReport temporal_stability(std::span<const RgbImage> frames,
                                   std::span<const CheckerAnnotation> anns) {
  if (frames.size() < 2) {
    throw InsufficientDataError("temporal_stability: need >= 2 frames");
  }
  if (frames.size() != anns.size()) {
    throw ShapeError("temporal_stability: frame/annotation count mismatch");
  }

  StabilityReport report;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    // Fluctuations are tracked on the encoded values as rendered.
    const auto centers = patch_centers(anns[f]);
    const PatchColors patches = extract_patches(frames[f], centers);
    std::array<std::array<double, 3>, 24> entry;
    for (int i = 0; i < 24; ++i) entry[i] = patches.rgb[i];
    report.series.push_back(entry);
  }

  for (int i = 0; i < 24; ++i) {
    double worst = 0.0;
    for (std::size_t f = 1; f < report.series.size(); ++f) {
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(report.series[f][i][c] -
                                         report.series[f - 1][i][c]));
      }
    }
    report.max_frame_diff[i] = worst;
  }
  return report;
}

}  // namespace hvsisp
