#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "hvsisp/calibration.hpp"
#include "hvsisp/errors.hpp"
#include "support/synthetic.hpp"

using namespace hvsisp;

namespace {

QuadBayerFrame uniform_frame(int w, int h, std::uint16_t value) {
  QuadBayerFrame f;
  f.width = w;
  f.height = h;
  f.bit_depth = 10;
  f.data.assign(static_cast<std::size_t>(w) * h, value);
  return f;
}

}  // namespace

TEST_CASE("one uniform dark frame: blc is the level, fpn zero") {
  QuadBayerFrame f = uniform_frame(4, 4, 64);
  DarkCalibration calib = calibrate_dark({&f, 1});
  CHECK(calib.blc == doctest::Approx(64.0));
  for (double v : calib.fpn) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("two frames average before the min") {
  std::vector<QuadBayerFrame> frames = {uniform_frame(4, 2, 62),
                                        uniform_frame(4, 2, 66)};
  DarkCalibration calib = calibrate_dark(frames);
  CHECK(calib.blc == doctest::Approx(64.0));
  for (double v : calib.fpn) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("row structure lands in fpn") {
  QuadBayerFrame f = uniform_frame(4, 2, 0);
  for (int x = 0; x < 4; ++x) {
    f.at(x, 0) = 70;
    f.at(x, 1) = 64;
  }
  DarkCalibration calib = calibrate_dark({&f, 1});
  CHECK(calib.blc == doctest::Approx(64.0));
  REQUIRE(calib.fpn.size() == 2);
  CHECK(calib.fpn[0] == doctest::Approx(6.0));
  CHECK(calib.fpn[1] == doctest::Approx(0.0));
}

TEST_CASE("empty list and mixed geometries rejected") {
  CHECK_THROWS_AS(calibrate_dark({}), EmptyInputError);
  std::vector<QuadBayerFrame> frames = {uniform_frame(4, 4, 1),
                                        uniform_frame(4, 2, 1)};
  CHECK_THROWS_AS(calibrate_dark(frames), ShapeError);
}

TEST_CASE("calibrate_dark is permutation invariant") {
  auto rng = testing::make_rng(42);
  std::vector<QuadBayerFrame> frames;
  for (int i = 0; i < 6; ++i) {
    frames.push_back(testing::random_frame(rng, 8, 6));
  }
  DarkCalibration a = calibrate_dark(frames);
  std::reverse(frames.begin(), frames.end());
  std::swap(frames[1], frames[4]);
  DarkCalibration b = calibrate_dark(frames);
  CHECK(a.blc == doctest::Approx(b.blc));
  for (std::size_t i = 0; i < a.fpn.size(); ++i) {
    CHECK(a.fpn[i] == doctest::Approx(b.fpn[i]));
  }
}

TEST_CASE("apply: arithmetic, clamp, identity") {
  QuadBayerFrame f = uniform_frame(2, 2, 100);
  DarkCalibration calib;
  calib.blc = 64.0;
  calib.fpn = {2.0, 2.0};
  QuadBayerFrame out = apply_dark_correction(f, calib);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) CHECK(out.at(x, y) == 34);
  }

  QuadBayerFrame low = uniform_frame(2, 2, 10);
  DarkCalibration blc64;
  blc64.blc = 64.0;
  blc64.fpn = {0.0, 0.0};
  out = apply_dark_correction(low, blc64);
  for (auto s : out.data) CHECK(s == 0);

  DarkCalibration zero;
  zero.fpn = {0.0, 0.0};
  out = apply_dark_correction(f, zero);
  CHECK(out.data == f.data);
}

TEST_CASE("apply: height mismatch rejected; output bounded by input") {
  QuadBayerFrame f = uniform_frame(2, 4, 50);
  DarkCalibration calib;
  calib.blc = 1.0;
  calib.fpn = {0.0, 0.0};
  CHECK_THROWS_AS(apply_dark_correction(f, calib), ShapeError);

  auto rng = testing::make_rng(9);
  for (int it = 0; it < 10; ++it) {
    QuadBayerFrame frame = testing::random_frame(rng, 8, 8);
    DarkCalibration c;
    std::uniform_real_distribution<double> bd(0.0, 30.0);
    c.blc = bd(rng);
    c.fpn.resize(8);
    for (double& v : c.fpn) v = bd(rng) / 10.0;
    QuadBayerFrame out = apply_dark_correction(frame, c);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      CHECK(out.data[i] <= frame.data[i]);
    }
  }
}

TEST_CASE("statistical recovery from noisy synthetic dark frames") {
  auto rng = testing::make_rng(2024);
  const int w = 16, h = 16;
  const double true_blc = 64.0;
  std::vector<double> true_fpn(h);
  for (int y = 0; y < h; ++y) true_fpn[y] = (y % 4) * 1.5;

  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<QuadBayerFrame> frames;
  for (int i = 0; i < 50; ++i) {
    QuadBayerFrame f;
    f.width = w;
    f.height = h;
    f.bit_depth = 10;
    f.data.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = true_blc + true_fpn[y] + noise(rng);
        f.at(x, y) = static_cast<std::uint16_t>(
            std::clamp<long>(std::lround(v), 0, 1023));
      }
    }
    frames.push_back(std::move(f));
  }

  DarkCalibration calib = calibrate_dark(frames);
  CHECK(std::abs(calib.blc - true_blc) < 1.0);
  for (int y = 0; y < h; ++y) {
    CHECK(std::abs(calib.fpn[y] - true_fpn[y]) < 1.0);
  }
}
