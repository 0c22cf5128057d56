#include "hvsisp/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hvsisp/errors.hpp"

namespace hvsisp {

DarkCalibration calibrate_dark(std::span<const QuadBayerFrame> frames) {
  if (frames.empty()) throw EmptyInputError("calibrate_dark: no frames");
  const QuadBayerFrame& first = frames[0];
  first.validate();
  for (const QuadBayerFrame& f : frames.subspan(1)) {
    if (f.width != first.width || f.height != first.height ||
        f.bit_depth != first.bit_depth) {
      throw ShapeError("calibrate_dark: mixed frame geometries");
    }
    f.validate();
  }

  const std::size_t n = first.data.size();
  std::vector<double> avg(n, 0.0);
  for (const QuadBayerFrame& f : frames) {
    for (std::size_t i = 0; i < n; ++i) avg[i] += f.data[i];
  }
  const double inv = 1.0 / static_cast<double>(frames.size());
  for (double& v : avg) v *= inv;

  DarkCalibration calib;
  calib.blc = *std::min_element(avg.begin(), avg.end());
  calib.fpn.resize(first.height);
  for (int y = 0; y < first.height; ++y) {
    double sum = 0.0;
    for (int x = 0; x < first.width; ++x) {
      sum += avg[static_cast<std::size_t>(y) * first.width + x] - calib.blc;
    }
    calib.fpn[y] = sum / first.width;
  }
  calib.validate();
  return calib;
}

QuadBayerFrame apply_dark_correction(const QuadBayerFrame& frame,
                                     const DarkCalibration& calib) {
  frame.validate();
  calib.validate();
  if (static_cast<int>(calib.fpn.size()) != frame.height) {
    throw ShapeError("apply_dark_correction: fpn length " +
                     std::to_string(calib.fpn.size()) + " != frame height " +
                     std::to_string(frame.height));
  }
  QuadBayerFrame out = frame;
  for (int y = 0; y < frame.height; ++y) {
    const double offset = calib.blc + calib.fpn[y];
    for (int x = 0; x < frame.width; ++x) {
      const long v = std::lround(frame.at(x, y) - offset);
      out.at(x, y) = static_cast<std::uint16_t>(std::max(0L, v));
    }
  }
  return out;
}

}  // namespace hvsisp
