#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace hvsisp {

// Location of the event-pixel hole inside each 2x2 quad block.
enum class PatternPhase : int {
  kTopLeft = 0,
  kTopRight = 1,
  kBottomLeft = 2,
  kBottomRight = 3,
};

// Rolling-shutter timing for one frame. Row r is exposed during
// [frame_start + r * row_readout_delta, ... + exposure_time).
struct ExposureMeta {
  std::int64_t frame_start_us = 0;
  double row_readout_delta_us = 0.0;
  double exposure_time_us = 0.0;

  void validate() const;  // InvariantError
};

// Single-channel integer mosaic with one event-pixel hole per 2x2 block.
struct QuadBayerFrame {
  int width = 0;
  int height = 0;
  int bit_depth = 10;  // 1..16
  PatternPhase phase = PatternPhase::kBottomRight;
  bool holes_filled = false;
  std::vector<std::uint16_t> data;  // row-major, width * height samples
  std::optional<ExposureMeta> exposure;

  std::uint32_t max_value() const { return (1u << bit_depth) - 1u; }
  std::uint16_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint16_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  void validate() const;  // InvariantError
};

struct Event {
  std::uint64_t t_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t polarity = 1;  // -1 or +1

  friend bool operator==(const Event&, const Event&) = default;
};

// Time-ordered polarity events plus the sensor geometry they live on.
struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  void validate() const;  // OrderError / RangeError / InvariantError

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;
};

// Four labeled corner-patch points of a 24-patch checker, LabelMe style.
struct CheckerAnnotation {
  ImagePoint cyan;   // row 1, col 6 patch center
  ImagePoint white;  // row 4, col 1
  ImagePoint brown;  // row 1, col 1
  ImagePoint black;  // row 4, col 6
  int image_width = 0;
  int image_height = 0;

  void validate() const;  // AnnotationError
};

enum class ColorSpaceTag { kLinear, kSrgb };

// Interleaved 3-channel float image, samples nominally in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  ColorSpaceTag colorspace = ColorSpaceTag::kLinear;
  std::vector<float> data;  // 3 * width * height, r g b per pixel

  static RgbImage filled(int w, int h, float r, float g, float b,
                         ColorSpaceTag tag = ColorSpaceTag::kLinear);

  float* pixel(int x, int y) {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const float* pixel(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  void validate() const;  // InvariantError (size, finiteness)
};

// Single-channel float plane; carrier for log-intensity and weight maps.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static GrayImage filled(int w, int h, float v);

  float at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

// Signed per-bin polarity accumulation, values[bin][y][x].
struct VoxelGrid {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int b, int y, int x) const {
    return values[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
  float& at(int b, int y, int x) {
    return values[(static_cast<std::size_t>(b) * height + y) * width + x];
  }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;
};

// Per-pixel event counts over a time window, at event-sensor resolution.
struct EventActivity {
  int width = 0;
  int height = 0;
  std::vector<float> counts;
  std::uint64_t t0_us = 0;
  std::uint64_t t1_us = 0;

  float at(int x, int y) const {
    return counts[static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y) {
    return counts[static_cast<std::size_t>(y) * width + x];
  }
};

// Green-anchored white balance multipliers.
struct WbGains {
  double r = 1.0;
  double g = 1.0;
  double b = 1.0;
};

// 3x3 color correction matrix, applied as row-vector pixel * matrix.
struct Ccm {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Ccm identity() { return Ccm{}; }
};

struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// 24 linear RGB patch colors in ColorChecker row-major order
// (4 rows x 6 columns); rgb[i] is patch i+1.
struct PatchColors {
  std::array<std::array<double, 3>, 24> rgb{};

  void validate() const;  // InvariantError (finite, >= 0)
};

// Global black level plus per-row fixed-pattern offsets.
struct DarkCalibration {
  double blc = 0.0;
  std::vector<double> fpn;

  void validate() const;  // InvariantError
};

struct FlickerReport {
  double dominant_frequency_hz = 0.0;
  double periodicity_score = 0.0;  // in [0, 1]
  double bin_width_us = 0.0;
};

}  // namespace hvsisp
