#pragma once

// Deterministic fixtures shared by the unit and acceptance suites: random
// frames/streams and a renderable checker scene with its analytic pipeline
// inverse.

#include <array>
#include <cmath>
#include <random>

#include "hvsisp/color.hpp"
#include "hvsisp/demosaic.hpp"
#include "hvsisp/types.hpp"

namespace hvsisp::testing {

inline std::mt19937 make_rng(unsigned seed) { return std::mt19937(seed); }

inline QuadBayerFrame random_frame(std::mt19937& rng, int w, int h,
                                   int bit_depth = 10,
                                   PatternPhase phase =
                                       PatternPhase::kBottomRight) {
  QuadBayerFrame f;
  f.width = w;
  f.height = h;
  f.bit_depth = bit_depth;
  f.phase = phase;
  std::uniform_int_distribution<int> dist(0, (1 << bit_depth) - 1);
  f.data.resize(static_cast<std::size_t>(w) * h);
  for (auto& s : f.data) s = static_cast<std::uint16_t>(dist(rng));
  return f;
}

inline EventStream random_stream(std::mt19937& rng, int w, int h,
                                 std::size_t count,
                                 std::uint64_t t_max = 100000) {
  EventStream s;
  s.width = w;
  s.height = h;
  std::uniform_int_distribution<std::uint64_t> td(0, t_max);
  std::uniform_int_distribution<int> xd(0, w - 1), yd(0, h - 1), pd(0, 1);
  std::vector<std::uint64_t> times(count);
  for (auto& t : times) t = td(rng);
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < count; ++i) {
    Event e;
    e.t_us = times[i];
    e.x = static_cast<std::uint16_t>(xd(rng));
    e.y = static_cast<std::uint16_t>(yd(rng));
    e.polarity = pd(rng) ? 1 : -1;
    s.events.push_back(e);
  }
  return s;
}

// The nominal encoded-sRGB chart used for synthetic scenes; identical to
// data/colorchecker_srgb_example.json.
inline PatchColors reference_checker_linear() {
  static constexpr int kBytes[24][3] = {
      {115, 82, 68},   {194, 150, 130}, {98, 122, 157},  {87, 108, 67},
      {133, 128, 177}, {103, 189, 170}, {214, 126, 44},  {80, 91, 166},
      {193, 90, 99},   {94, 60, 108},   {157, 188, 64},  {224, 163, 46},
      {56, 61, 150},   {70, 148, 73},   {175, 54, 60},   {231, 199, 31},
      {187, 86, 149},  {8, 133, 161},   {243, 243, 242}, {200, 200, 200},
      {160, 160, 160}, {122, 122, 121}, {85, 85, 85},    {52, 52, 52}};
  PatchColors p;
  for (int i = 0; i < 24; ++i) {
    for (int c = 0; c < 3; ++c) p.rgb[i][c] = srgb_decode(kBytes[i][c] / 255.0);
  }
  return p;
}

struct SyntheticScene {
  RgbImage encoded;  // sRGB
  CheckerAnnotation ann;
  std::array<ImagePoint, 24> centers;
  PatchColors patch_fills_linear;
  int patch_size = 0;
};

// Paint the 24 patches as solid squares on a mid-gray card, annotated by
// the four labeled corner-patch centers.
inline SyntheticScene render_checker_scene(int size,
                                           const PatchColors& fills_linear) {
  SyntheticScene scene;
  scene.patch_fills_linear = fills_linear;
  const float bg = 0.18f;
  scene.encoded = RgbImage::filled(size, size, bg, bg, bg, ColorSpaceTag::kSrgb);

  const int margin = size / 16;
  const int pitch_x = (size - 2 * margin) / 6;
  const int pitch_y = (size - 2 * margin) / 4;
  const int patch = static_cast<int>(std::min(pitch_x, pitch_y) * 0.8);
  scene.patch_size = patch;

  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) {
      const int cx = margin + c * pitch_x + pitch_x / 2;
      const int cy = margin + r * pitch_y + pitch_y / 2;
      scene.centers[r * 6 + c] = ImagePoint{static_cast<double>(cx),
                                            static_cast<double>(cy)};
      const auto& fill = fills_linear.rgb[r * 6 + c];
      const float enc[3] = {static_cast<float>(srgb_encode(fill[0])),
                            static_cast<float>(srgb_encode(fill[1])),
                            static_cast<float>(srgb_encode(fill[2]))};
      for (int y = cy - patch / 2; y < cy - patch / 2 + patch; ++y) {
        for (int x = cx - patch / 2; x < cx - patch / 2 + patch; ++x) {
          float* px = scene.encoded.pixel(x, y);
          px[0] = enc[0];
          px[1] = enc[1];
          px[2] = enc[2];
        }
      }
    }
  }
  scene.ann.brown = scene.centers[0];
  scene.ann.cyan = scene.centers[5];
  scene.ann.white = scene.centers[18];
  scene.ann.black = scene.centers[23];
  scene.ann.image_width = size;
  scene.ann.image_height = size;
  return scene;
}

inline Ccm invert_ccm(const Ccm& m) {
  const auto& a = m.m;
  const double det =
      a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Ccm inv;
  inv.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  inv.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  inv.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  inv.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  inv.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  inv.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  inv.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  inv.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  inv.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return inv;
}

// Analytic inverse of the rendering chain: decode, undo CCM and WB, sample
// the mosaic sites, scale to counts and add the dark structure (plus
// optional Gaussian noise in counts). Hole sites are zeroed; the pipeline
// must refill them.
inline QuadBayerFrame invert_pipeline(const RgbImage& encoded_scene,
                                      const Ccm& ccm_true,
                                      const WbGains& gains, int bit_depth,
                                      double blc, const std::vector<double>& fpn,
                                      std::mt19937* noise_rng = nullptr,
                                      double noise_sigma_counts = 0.0) {
  const Ccm inv = invert_ccm(ccm_true);
  QuadBayerFrame frame;
  frame.width = encoded_scene.width;
  frame.height = encoded_scene.height;
  frame.bit_depth = bit_depth;
  frame.phase = PatternPhase::kBottomRight;
  frame.data.resize(static_cast<std::size_t>(frame.width) * frame.height);

  ColorSiteMap map(frame.phase);
  const double full = (1 << bit_depth) - 1;
  std::normal_distribution<double> noise(0.0, noise_sigma_counts);

  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const SiteKind kind = map.site(x, y);
      if (kind == SiteKind::kHole) {
        frame.at(x, y) = 0;
        continue;
      }
      const float* px = encoded_scene.pixel(x, y);
      double lin[3];
      for (int c = 0; c < 3; ++c) lin[c] = srgb_decode(px[c]);
      double wb[3];
      for (int c = 0; c < 3; ++c) {
        wb[c] = lin[0] * inv.m[0][c] + lin[1] * inv.m[1][c] +
                lin[2] * inv.m[2][c];
      }
      double raw = 0.0;
      switch (kind) {
        case SiteKind::kRed: raw = wb[0] / gains.r; break;
        case SiteKind::kGreen: raw = wb[1] / gains.g; break;
        case SiteKind::kBlue: raw = wb[2] / gains.b; break;
        default: break;
      }
      double counts = raw * full + blc + fpn[y];
      if (noise_rng && noise_sigma_counts > 0.0) counts += noise(*noise_rng);
      const long v = std::lround(counts);
      frame.at(x, y) = static_cast<std::uint16_t>(
          std::clamp<long>(v, 0, static_cast<long>(full)));
    }
  }
  return frame;
}

}  // namespace hvsisp::testing
