#include "hvsisp/types.hpp"

#include <cmath>
#include <string>

#include "hvsisp/errors.hpp"

namespace hvsisp {

void ExposureMeta::validate() const {
  if (!(exposure_time_us > 0.0)) {
    throw InvariantError("ExposureMeta: exposure_time must be > 0");
  }
  if (!(row_readout_delta_us >= 0.0)) {
    throw InvariantError("ExposureMeta: row_readout_delta must be >= 0");
  }
}

void QuadBayerFrame::validate() const {
  if (width <= 0 || height <= 0) {
    throw InvariantError("QuadBayerFrame: non-positive dimensions");
  }
  if (width % 2 != 0 || height % 2 != 0) {
    throw InvariantError("QuadBayerFrame: width and height must be even, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (bit_depth < 1 || bit_depth > 16) {
    throw InvariantError("QuadBayerFrame: bit_depth must be in 1..16");
  }
  if (data.size() != static_cast<std::size_t>(width) * height) {
    throw InvariantError("QuadBayerFrame: data length != width * height");
  }
  const std::uint32_t limit = max_value();
  for (std::uint16_t s : data) {
    if (s > limit) {
      throw InvariantError("QuadBayerFrame: sample " + std::to_string(s) +
                           " exceeds bit depth " + std::to_string(bit_depth));
    }
  }
  if (exposure) exposure->validate();
}

void EventStream::validate() const {
  if (width < 0 || height < 0) {
    throw InvariantError("EventStream: negative dimensions");
  }
  std::uint64_t prev = 0;
  bool first = true;
  for (const Event& e : events) {
    if (e.polarity != 1 && e.polarity != -1) {
      throw RangeError("EventStream: polarity must be -1 or +1");
    }
    if (e.x >= width || e.y >= height) {
      throw RangeError("EventStream: event at (" + std::to_string(e.x) + "," +
                       std::to_string(e.y) + ") outside " +
                       std::to_string(width) + "x" + std::to_string(height));
    }
    if (!first && e.t_us < prev) {
      throw OrderError("EventStream: timestamps not sorted");
    }
    prev = e.t_us;
    first = false;
  }
}

void CheckerAnnotation::validate() const {
  const ImagePoint pts[4] = {brown, cyan, white, black};
  for (const ImagePoint& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw AnnotationError("annotation point not finite");
    }
    if (p.x < 0 || p.y < 0 || p.x >= image_width || p.y >= image_height) {
      throw AnnotationError("annotation point outside image bounds");
    }
  }
  // Coincident corners collapse grid rows or columns.
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) < 1e-9) {
        throw AnnotationError("degenerate annotation quad (coincident corners)");
      }
    }
  }
  // Shoelace area of the brown-cyan-black-white quad; zero means degenerate.
  double area = 0.0;
  const ImagePoint quad[4] = {brown, cyan, black, white};
  for (int i = 0; i < 4; ++i) {
    const ImagePoint& p = quad[i];
    const ImagePoint& q = quad[(i + 1) % 4];
    area += p.x * q.y - q.x * p.y;
  }
  if (std::abs(area) < 1e-9) {
    throw AnnotationError("degenerate annotation quad (zero area)");
  }
}

RgbImage RgbImage::filled(int w, int h, float r, float g, float b,
                          ColorSpaceTag tag) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.colorspace = tag;
  img.data.resize(3 * static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

void RgbImage::validate() const {
  if (width <= 0 || height <= 0) {
    throw InvariantError("RgbImage: non-positive dimensions");
  }
  if (data.size() != 3 * static_cast<std::size_t>(width) * height) {
    throw InvariantError("RgbImage: data length != 3 * width * height");
  }
  for (float s : data) {
    if (!std::isfinite(s)) throw InvariantError("RgbImage: non-finite sample");
  }
}

GrayImage GrayImage::filled(int w, int h, float v) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.data.assign(static_cast<std::size_t>(w) * h, v);
  return img;
}

void PatchColors::validate() const {
  for (const auto& p : rgb) {
    for (double c : p) {
      if (!std::isfinite(c) || c < 0.0) {
        throw InvariantError("PatchColors: entries must be finite and >= 0");
      }
    }
  }
}

void DarkCalibration::validate() const {
  if (!(blc >= 0.0)) throw InvariantError("DarkCalibration: blc must be >= 0");
  for (double v : fpn) {
    if (!(v >= 0.0)) {
      throw InvariantError("DarkCalibration: fpn values must be >= 0");
    }
  }
}

}  // namespace hvsisp
