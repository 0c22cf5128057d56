#include "hvsisp/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hvsisp/errors.hpp"

namespace hvsisp {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

// ------------------------------------------------------------ patch geometry

std::array<ImagePoint, 24> patch_centers(const CheckerAnnotation& ann) {
  ann.validate();
  std::array<ImagePoint, 24> centers;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) {
      const double u = c / 5.0;  // col 1 -> 0, col 6 -> 1
      const double v = r / 3.0;  // row 1 -> 0, row 4 -> 1
      ImagePoint& p = centers[r * 6 + c];
      p.x = (1 - u) * (1 - v) * ann.brown.x + u * (1 - v) * ann.cyan.x +
            (1 - u) * v * ann.white.x + u * v * ann.black.x;
      p.y = (1 - u) * (1 - v) * ann.brown.y + u * (1 - v) * ann.cyan.y +
            (1 - u) * v * ann.white.y + u * v * ann.black.y;
    }
  }
  return centers;
}

PatchColors extract_patches(const RgbImage& img,
                            const std::array<ImagePoint, 24>& centers) {
  img.validate();

  double col_spacing = 0.0, row_spacing = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) {
      col_spacing += std::hypot(centers[r * 6 + c + 1].x - centers[r * 6 + c].x,
                                centers[r * 6 + c + 1].y - centers[r * 6 + c].y);
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 6; ++c) {
      row_spacing += std::hypot(centers[(r + 1) * 6 + c].x - centers[r * 6 + c].x,
                                centers[(r + 1) * 6 + c].y - centers[r * 6 + c].y);
    }
  }
  col_spacing /= 20.0;
  row_spacing /= 18.0;
  const double spacing = std::min(col_spacing, row_spacing);
  const int side = std::max<long>(3, std::lround(0.25 * spacing));
  const int half = side / 2;

  PatchColors patches;
  for (int i = 0; i < 24; ++i) {
    const int cx = static_cast<int>(std::lround(centers[i].x));
    const int cy = static_cast<int>(std::lround(centers[i].y));
    if (cx < 0 || cy < 0 || cx >= img.width || cy >= img.height) {
      throw RangeError("extract_patches: patch " + std::to_string(i + 1) +
                       " center outside image");
    }
    const int x0 = std::max(0, cx - half);
    const int x1 = std::min(img.width - 1, cx + half);
    const int y0 = std::max(0, cy - half);
    const int y1 = std::min(img.height - 1, cy + half);
    double sum[3] = {0, 0, 0};
    long n = 0;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const float* px = img.pixel(x, y);
        sum[0] += px[0];
        sum[1] += px[1];
        sum[2] += px[2];
        ++n;
      }
    }
    for (int c = 0; c < 3; ++c) patches.rgb[i][c] = sum[c] / n;
  }
  return patches;
}

// -------------------------------------------------------------- white balance

WbGains estimate_wb(const PatchColors& patches, double eps) {
  patches.validate();
  const auto& p21 = patches.rgb[20];
  if (p21[0] <= eps || p21[1] <= eps || p21[2] <= eps) {
    throw IlluminantError("estimate_wb: patch 21 channel at or below " +
                          std::to_string(eps));
  }
  return WbGains{p21[1] / p21[0], 1.0, p21[1] / p21[2]};
}

RgbImage apply_wb(RgbImage img, const WbGains& gains) {
  if (!(gains.r > 0.0) || !(gains.g > 0.0) || !(gains.b > 0.0)) {
    throw InvariantError("apply_wb: gains must be > 0");
  }
  const float g[3] = {static_cast<float>(gains.r), static_cast<float>(gains.g),
                      static_cast<float>(gains.b)};
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    for (int c = 0; c < 3; ++c) {
      img.data[i + c] =
          std::min(1.0f, std::max(0.0f, img.data[i + c] * g[c]));
    }
  }
  return img;
}

// ----------------------------------------------------------------- Lab / dE

namespace {

// IEC 61966-2-1 primaries, D65 white.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhiteX = 0.95047, kWhiteY = 1.0, kWhiteZ = 1.08883;

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  constexpr double kDelta3 = kDelta * kDelta * kDelta;
  return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

LabColor linear_to_lab(double r, double g, double b) {
  const double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
  const double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
  const double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  return LabColor{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabColor linear_to_lab(const std::array<double, 3>& rgb) {
  return linear_to_lab(rgb[0], rgb[1], rgb[2]);
}

double delta_e_ab(const LabColor& a, const LabColor& b) {
  const double dl = a.L - b.L, da = a.a - b.a, db = a.b - b.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

double ciede2000(const LabColor& lab1, const LabColor& lab2) {
  const double c1 = std::hypot(lab1.a, lab1.b);
  const double c2 = std::hypot(lab2.a, lab2.b);
  const double c_bar = 0.5 * (c1 + c2);
  const double c_bar7 = std::pow(c_bar, 7.0);
  constexpr double k25_7 = 6103515625.0;  // 25^7
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + k25_7)));

  const double a1p = (1.0 + g) * lab1.a;
  const double a2p = (1.0 + g) * lab2.a;
  const double c1p = std::hypot(a1p, lab1.b);
  const double c2p = std::hypot(a2p, lab2.b);

  auto hue_deg = [](double ap, double b) {
    if (ap == 0.0 && b == 0.0) return 0.0;
    double h = std::atan2(b, ap) / kDeg;
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue_deg(a1p, lab1.b);
  const double h2p = hue_deg(a2p, lab2.b);

  const double dlp = lab2.L - lab1.L;
  const double dcp = c2p - c1p;

  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > 180.0) {
      dhp -= 360.0;
    } else if (dhp < -180.0) {
      dhp += 360.0;
    }
  }
  const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(0.5 * dhp * kDeg);

  const double l_bar = 0.5 * (lab1.L + lab2.L);
  const double cp_bar = 0.5 * (c1p + c2p);

  double h_bar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= 180.0) {
      h_bar = 0.5 * (h1p + h2p);
    } else if (h1p + h2p < 360.0) {
      h_bar = 0.5 * (h1p + h2p + 360.0);
    } else {
      h_bar = 0.5 * (h1p + h2p - 360.0);
    }
  }

  const double t = 1.0 - 0.17 * std::cos((h_bar - 30.0) * kDeg) +
                   0.24 * std::cos(2.0 * h_bar * kDeg) +
                   0.32 * std::cos((3.0 * h_bar + 6.0) * kDeg) -
                   0.20 * std::cos((4.0 * h_bar - 63.0) * kDeg);
  const double dtheta = 30.0 * std::exp(-std::pow((h_bar - 275.0) / 25.0, 2.0));
  const double cp_bar7 = std::pow(cp_bar, 7.0);
  const double rc = 2.0 * std::sqrt(cp_bar7 / (cp_bar7 + k25_7));
  const double l50 = (l_bar - 50.0) * (l_bar - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * cp_bar;
  const double sh = 1.0 + 0.015 * cp_bar * t;
  const double rt = -std::sin(2.0 * dtheta * kDeg) * rc;

  const double vl = dlp / sl;
  const double vc = dcp / sc;
  const double vh = dHp / sh;
  return std::sqrt(vl * vl + vc * vc + vh * vh + rt * vc * vh);
}

// ------------------------------------------------------------------ CCM fit

namespace {

// Solve an n x n linear system in place by Gaussian elimination with
// partial pivoting; n <= 4 here.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-14) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return true;
}

// Least-squares init for out = measured * M, one matrix column at a time.
// With white preservation each column is constrained to sum to 1 so that
// (1,1,1) * M == (1,1,1).
Ccm least_squares_ccm(const PatchColors& measured, const PatchColors& reference,
                      bool white_preserve) {
  double ata[3][3] = {};
  double atb[3][3] = {};  // atb[j] = A^T * ref_column_j
  for (int i = 0; i < 24; ++i) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        ata[r][c] += measured.rgb[i][r] * measured.rgb[i][c];
        atb[c][r] += measured.rgb[i][r] * reference.rgb[i][c];
      }
    }
  }

  Ccm ccm;
  for (int j = 0; j < 3; ++j) {
    if (!white_preserve) {
      std::vector<std::vector<double>> a(3, std::vector<double>(3));
      std::vector<double> b(3);
      for (int r = 0; r < 3; ++r) {
        b[r] = atb[j][r];
        for (int c = 0; c < 3; ++c) a[r][c] = ata[r][c];
      }
      if (!solve_linear(a, b)) return Ccm::identity();
      for (int r = 0; r < 3; ++r) ccm.m[r][j] = b[r];
    } else {
      // KKT system for min ||A x - b||^2 s.t. sum(x) == 1.
      std::vector<std::vector<double>> a(4, std::vector<double>(4, 0.0));
      std::vector<double> b(4);
      for (int r = 0; r < 3; ++r) {
        b[r] = atb[j][r];
        for (int c = 0; c < 3; ++c) a[r][c] = ata[r][c];
        a[r][3] = 1.0;
        a[3][r] = 1.0;
      }
      b[3] = 1.0;
      if (!solve_linear(a, b)) return Ccm::identity();
      for (int r = 0; r < 3; ++r) ccm.m[r][j] = b[r];
    }
  }
  return ccm;
}

Ccm params_to_ccm(const std::vector<double>& x, bool white_preserve) {
  Ccm ccm;
  if (!white_preserve) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ccm.m[r][c] = x[r * 3 + c];
    }
  } else {
    for (int j = 0; j < 3; ++j) {
      ccm.m[0][j] = x[j * 2];
      ccm.m[1][j] = x[j * 2 + 1];
      ccm.m[2][j] = 1.0 - ccm.m[0][j] - ccm.m[1][j];
    }
  }
  return ccm;
}

std::vector<double> ccm_to_params(const Ccm& ccm, bool white_preserve) {
  if (!white_preserve) {
    std::vector<double> x(9);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) x[r * 3 + c] = ccm.m[r][c];
    }
    return x;
  }
  std::vector<double> x(6);
  for (int j = 0; j < 3; ++j) {
    x[j * 2] = ccm.m[0][j];
    x[j * 2 + 1] = ccm.m[1][j];
  }
  return x;
}

struct NelderMeadResult {
  std::vector<double> best;
  double best_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <typename F>
NelderMeadResult nelder_mead(F objective, std::vector<double> x0,
                             int max_iterations, double tolerance) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  pts.push_back(x0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p = x0;
    p[i] += std::max(0.05 * std::abs(p[i]), 0.02);
    pts.push_back(std::move(p));
  }
  for (const auto& p : pts) vals.push_back(objective(p));

  std::vector<std::size_t> order(pts.size());
  auto sort_order = [&]() {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  };

  NelderMeadResult res;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    sort_order();
    const double spread = vals[order.back()] - vals[order.front()];
    if (spread < tolerance) {
      res.converged = true;
      break;
    }
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    const std::size_t best = order.front();

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = centroid[i] + t * (centroid[i] - pts[worst][i]);
      }
      return p;
    };

    std::vector<double> reflected = blend(1.0);
    const double fr = objective(reflected);
    if (fr < vals[best]) {
      std::vector<double> expanded = blend(2.0);
      const double fe = objective(expanded);
      if (fe < fr) {
        pts[worst] = std::move(expanded);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(reflected);
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = std::move(reflected);
      vals[worst] = fr;
    } else {
      std::vector<double> contracted = blend(fr < vals[worst] ? 0.5 : -0.5);
      const double fc = objective(contracted);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = std::move(contracted);
        vals[worst] = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t k = 0; k < pts.size(); ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < n; ++i) {
            pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
          }
          vals[k] = objective(pts[k]);
        }
      }
    }
  }
  sort_order();
  res.best = pts[order.front()];
  res.best_value = vals[order.front()];
  res.iterations = iter;
  return res;
}

double luminance(const std::array<double, 3>& rgb) {
  return kRgbToXyz[1][0] * rgb[0] + kRgbToXyz[1][1] * rgb[1] +
         kRgbToXyz[1][2] * rgb[2];
}

}  // namespace

double ccm_objective(const PatchColors& measured, const PatchColors& reference,
                     const Ccm& ccm) {
  double sum = 0.0;
  for (int i = 0; i < 24; ++i) {
    const auto& m = measured.rgb[i];
    std::array<double, 3> corrected;
    for (int c = 0; c < 3; ++c) {
      corrected[c] = clamp01(m[0] * ccm.m[0][c] + m[1] * ccm.m[1][c] +
                             m[2] * ccm.m[2][c]);
    }
    sum += ciede2000(linear_to_lab(corrected), linear_to_lab(reference.rgb[i]));
  }
  return sum / 24.0;
}

Ccm fit_ccm(const PatchColors& measured, const PatchColors& reference,
            const FitOptions& options, FitReport* report) {
  measured.validate();
  reference.validate();

  PatchColors work = measured;
  bool normalized = false;
  double exposure_scale = 1.0;
  if (options.exposure_normalize) {
    const double ym = luminance(work.rgb[20]);
    const double yr = luminance(reference.rgb[20]);
    if (ym > 1e-9 && yr > 0.0) {
      exposure_scale = yr / ym;
      for (auto& p : work.rgb) {
        for (double& c : p) c *= exposure_scale;
      }
      normalized = true;
    }
  }

  const Ccm init = least_squares_ccm(work, reference, options.white_preserve);
  auto evaluate = [&](const std::vector<double>& x) {
    const double v =
        ccm_objective(work, reference, params_to_ccm(x, options.white_preserve));
    if (!std::isfinite(v)) throw FitError("fit_ccm: non-finite objective");
    return v;
  };

  const std::vector<double> x0 = ccm_to_params(init, options.white_preserve);
  const double initial = evaluate(x0);
  NelderMeadResult nm =
      nelder_mead(evaluate, x0, options.max_iterations, options.tolerance);

  // The initial point is a simplex vertex, so the best vertex can only be
  // at least as good; keep the guarantee explicit.
  Ccm fitted = params_to_ccm(nm.best, options.white_preserve);
  double final_value = nm.best_value;
  if (final_value > initial) {
    fitted = init;
    final_value = initial;
  }

  // Fold the exposure scale into the matrix so it applies directly to the
  // measured data: (s * m) * M == m * (s * M). The objective values are
  // unchanged by this rewrite.
  if (normalized) {
    for (auto& row : fitted.m) {
      for (double& v : row) v *= exposure_scale;
    }
  }

  if (report) {
    report->initial_objective = initial;
    report->final_objective = final_value;
    report->iterations = nm.iterations;
    report->converged = nm.converged;
    report->exposure_normalized = normalized;
    report->notes = "objective: mean CIEDE2000 on clamped corrected patches";
  }
  return fitted;
}

RgbImage apply_ccm(RgbImage img, const Ccm& ccm) {
  const float m[3][3] = {
      {static_cast<float>(ccm.m[0][0]), static_cast<float>(ccm.m[0][1]),
       static_cast<float>(ccm.m[0][2])},
      {static_cast<float>(ccm.m[1][0]), static_cast<float>(ccm.m[1][1]),
       static_cast<float>(ccm.m[1][2])},
      {static_cast<float>(ccm.m[2][0]), static_cast<float>(ccm.m[2][1]),
       static_cast<float>(ccm.m[2][2])},
  };
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const float r = img.data[i], g = img.data[i + 1], b = img.data[i + 2];
    for (int c = 0; c < 3; ++c) {
      const float v = r * m[0][c] + g * m[1][c] + b * m[2][c];
      img.data[i + c] = std::min(1.0f, std::max(0.0f, v));
    }
  }
  return img;
}

// -------------------------------------------------------------------- gamma

double srgb_encode(double linear) {
  if (linear <= 0.0031308) return 12.92 * linear;
  return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

double srgb_decode(double encoded) {
  if (encoded <= 0.04045) return encoded / 12.92;
  return std::pow((encoded + 0.055) / 1.055, 2.4);
}

RgbImage srgb_encode_image(RgbImage img) {
  for (float& s : img.data) {
    s = static_cast<float>(srgb_encode(static_cast<double>(s)));
  }
  img.colorspace = ColorSpaceTag::kSrgb;
  return img;
}

RgbImage srgb_decode_image(RgbImage img) {
  for (float& s : img.data) {
    s = static_cast<float>(srgb_decode(static_cast<double>(s)));
  }
  img.colorspace = ColorSpaceTag::kLinear;
  return img;
}

RgbImage highlight_clip(RgbImage img, double saturation_fraction) {
  if (!(saturation_fraction > 0.0) || saturation_fraction > 1.0) {
    throw ConfigError("highlight_clip: fraction must be in (0, 1]");
  }
  const float f = static_cast<float>(saturation_fraction);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    if (img.data[i] >= f || img.data[i + 1] >= f || img.data[i + 2] >= f) {
      img.data[i] = img.data[i + 1] = img.data[i + 2] = 1.0f;
    }
  }
  return img;
}

}  // namespace hvsisp
