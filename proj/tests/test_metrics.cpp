#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hvsisp/errors.hpp"
#include "hvsisp/metrics.hpp"
#include "support/synthetic.hpp"

using namespace hvsisp;

namespace {

RgbImage random_image(std::mt19937& rng, int w, int h) {
  RgbImage img = RgbImage::filled(w, h, 0, 0, 0);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (auto& s : img.data) s = dist(rng);
  return img;
}

}  // namespace

TEST_CASE("psnr: sentinel, closed forms, monotonicity") {
  auto rng = testing::make_rng(31);
  RgbImage a = random_image(rng, 16, 12);
  CHECK(std::isinf(psnr(a, a)));

  // Closed form evaluated on the float-rounded uniform difference.
  RgbImage base = RgbImage::filled(8, 8, 0.4f, 0.4f, 0.4f);
  RgbImage off = RgbImage::filled(8, 8, 0.5f, 0.5f, 0.5f);
  const double d1 = static_cast<double>(0.5f) - static_cast<double>(0.4f);
  CHECK(psnr(base, off) ==
        doctest::Approx(10.0 * std::log10(1.0 / (d1 * d1))).epsilon(1e-12));
  CHECK(psnr(base, off) == doctest::Approx(20.0).epsilon(1e-6));

  RgbImage half = RgbImage::filled(8, 8, 0.9f, 0.9f, 0.9f);
  RgbImage lo = RgbImage::filled(8, 8, 0.4f, 0.4f, 0.4f);
  const double d2 = static_cast<double>(0.9f) - static_cast<double>(0.4f);
  CHECK(psnr(half, lo) ==
        doctest::Approx(10.0 * std::log10(1.0 / (d2 * d2))).epsilon(1e-12));
  CHECK(psnr(half, lo) == doctest::Approx(6.0206).epsilon(1e-4));

  // Strictly decreasing with noise amplitude.
  double prev = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.05, 0.1, 0.2}) {
    RgbImage noisy = a;
    std::mt19937 nrng(7);
    std::uniform_real_distribution<float> n(0.0f, static_cast<float>(amp));
    for (auto& s : noisy.data) s = std::min(1.0f, s + n(nrng));
    const double v = psnr(a, noisy);
    CHECK(v < prev);
    prev = v;
  }

  RgbImage other = RgbImage::filled(4, 4, 0, 0, 0);
  CHECK_THROWS_AS(psnr(a, other), ShapeError);
}

TEST_CASE("ssim: identity, symmetry, luminance closed form") {
  auto rng = testing::make_rng(5);
  for (int it = 0; it < 3; ++it) {
    RgbImage a = random_image(rng, 13, 17);
    CHECK(ssim(a, a) == 1.0);
    RgbImage b = random_image(rng, 13, 17);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  }

  RgbImage x = RgbImage::filled(16, 16, 0.3f, 0.3f, 0.3f);
  RgbImage y = RgbImage::filled(16, 16, 0.7f, 0.7f, 0.7f);
  const double c1 = 1e-4;
  const double mx = 0.3f, my = 0.7f;  // float-rounded constants
  const double expected = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
  CHECK(ssim(x, y) == doctest::Approx(expected).epsilon(1e-6));

  RgbImage small = RgbImage::filled(8, 8, 0.1f, 0.1f, 0.1f);
  CHECK_THROWS_AS(ssim(small, small), ShapeError);
}

TEST_CASE("l1: closed forms and brute-force oracle") {
  auto rng = testing::make_rng(41);
  RgbImage a = random_image(rng, 9, 7);
  CHECK(l1(a, a) == doctest::Approx(0.0));

  RgbImage base = RgbImage::filled(5, 5, 0.2f, 0.2f, 0.2f);
  RgbImage off = RgbImage::filled(5, 5, 0.3f, 0.3f, 0.3f);
  CHECK(l1(base, off) == doctest::Approx(0.1).epsilon(1e-6));

  RgbImage b = random_image(rng, 9, 7);
  long double oracle = 0.0;
  for (std::size_t i = a.data.size(); i-- > 0;) {
    oracle += std::abs(static_cast<long double>(a.data[i]) - b.data[i]);
  }
  oracle /= static_cast<long double>(a.data.size());
  CHECK(l1(a, b) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));

  // Triangle inequality across three images.
  RgbImage c = random_image(rng, 9, 7);
  CHECK(l1(a, c) <= l1(a, b) + l1(b, c) + 1e-12);
}

TEST_CASE("color_accuracy: exact render scores zero everywhere") {
  const PatchColors reference = testing::reference_checker_linear();
  auto scene = testing::render_checker_scene(192, reference);
  std::vector<RgbImage> frames = {scene.encoded};
  std::vector<CheckerAnnotation> anns = {scene.ann};
  ColorAccuracyReport report = color_accuracy(frames, anns, reference);
  REQUIRE(report.frames.size() == 1);
  for (int i = 0; i < 24; ++i) {
    CHECK(report.frames[0].de00[i] == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(report.frames[0].de_ab[i] == doctest::Approx(0.0).epsilon(1e-3));
  }
  CHECK(report.mean_de00 == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(report.mean_de00 <= report.mean_max_de00 + 1e-12);
}

TEST_CASE("color_accuracy: single perturbed patch drives the maximum") {
  const PatchColors reference = testing::reference_checker_linear();
  PatchColors fills = reference;
  fills.rgb[4] = {std::min(1.0, fills.rgb[4][0] + 0.15), fills.rgb[4][1],
                  fills.rgb[4][2]};
  auto scene = testing::render_checker_scene(192, fills);
  std::vector<RgbImage> frames = {scene.encoded};
  std::vector<CheckerAnnotation> anns = {scene.ann};
  ColorAccuracyReport report = color_accuracy(frames, anns, reference);

  double expected_max = 0.0;
  int argmax = -1;
  for (int i = 0; i < 24; ++i) {
    if (report.frames[0].de00[i] > expected_max) {
      expected_max = report.frames[0].de00[i];
      argmax = i;
    }
  }
  CHECK(argmax == 4);
  CHECK(report.mean_max_de00 == doctest::Approx(expected_max));
  CHECK(report.frames[0].de00[4] > 1.0);
}

TEST_CASE("color_accuracy: aggregates match a hand table") {
  // Two frames rendered from per-frame fills chosen so the per-patch errors
  // are known to be zero except where fills differ from the reference.
  const PatchColors reference = testing::reference_checker_linear();
  auto scene = testing::render_checker_scene(192, reference);
  std::vector<RgbImage> frames = {scene.encoded, scene.encoded};
  std::vector<CheckerAnnotation> anns = {scene.ann, scene.ann};
  ColorAccuracyReport report = color_accuracy(frames, anns, reference);
  // mean == median == mean-of-maxima == 0 for identical exact renders.
  CHECK(report.mean_de00 == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(report.median_de00 == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(report.mean_max_de00 == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("temporal_stability: identical frames, one brightened patch") {
  const PatchColors reference = testing::reference_checker_linear();
  auto scene = testing::render_checker_scene(192, reference);

  std::vector<RgbImage> frames = {scene.encoded, scene.encoded, scene.encoded};
  std::vector<CheckerAnnotation> anns(3, scene.ann);
  StabilityReport still = temporal_stability(frames, anns);
  for (double d : still.max_frame_diff) CHECK(d == doctest::Approx(0.0));

  // Brighten patch 5 of the middle frame by +0.02 encoded.
  RgbImage brightened = scene.encoded;
  const ImagePoint c = scene.centers[4];
  const int half = scene.patch_size / 2 - 1;
  for (int y = static_cast<int>(c.y) - half; y <= static_cast<int>(c.y) + half;
       ++y) {
    for (int x = static_cast<int>(c.x) - half;
         x <= static_cast<int>(c.x) + half; ++x) {
      float* px = brightened.pixel(x, y);
      for (int ch = 0; ch < 3; ++ch) px[ch] = std::min(1.0f, px[ch] + 0.02f);
    }
  }
  frames[1] = brightened;
  StabilityReport moved = temporal_stability(frames, anns);
  CHECK(moved.max_frame_diff[4] == doctest::Approx(0.02).epsilon(1e-3));
  for (int i = 0; i < 24; ++i) {
    if (i != 4) CHECK(moved.max_frame_diff[i] == doctest::Approx(0.0));
  }

  // Reversing the frame order preserves the max.
  std::vector<RgbImage> reversed = {frames[2], frames[1], frames[0]};
  StabilityReport rev = temporal_stability(reversed, anns);
  CHECK(rev.max_frame_diff[4] == doctest::Approx(moved.max_frame_diff[4]));

  std::vector<RgbImage> one = {scene.encoded};
  std::vector<CheckerAnnotation> one_ann = {scene.ann};
  CHECK_THROWS_AS(temporal_stability(one, one_ann), InsufficientDataError);
}
