#include "hvsisp/events.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hvsisp/errors.hpp"

namespace hvsisp {

VoxelGrid voxelize(const EventStream& stream, std::uint64_t t0_us,
                   std::uint64_t t1_us, int bins) {
  stream.validate();
  if (bins == 0) throw ConfigError("voxelize: bins must be >= 1");
  if (bins < 0 || t1_us <= t0_us) {
    throw ConfigError("voxelize: need t1 > t0 and bins >= 1");
  }

  VoxelGrid grid;
  grid.bins = bins;
  grid.height = stream.height;
  grid.width = stream.width;
  const std::size_t plane =
      static_cast<std::size_t>(stream.width) * stream.height;
  std::vector<double> acc(plane * bins, 0.0);

  const double bin_span = static_cast<double>(t1_us - t0_us) / bins;
  for (const Event& e : stream.events) {
    if (e.t_us < t0_us || e.t_us >= t1_us) continue;
    const double u = static_cast<double>(e.t_us - t0_us) / bin_span - 0.5;
    const int i0 = static_cast<int>(std::floor(u));
    const double frac = u - i0;
    const int lo = std::clamp(i0, 0, bins - 1);
    const int hi = std::clamp(i0 + 1, 0, bins - 1);
    const std::size_t at = static_cast<std::size_t>(e.y) * stream.width + e.x;
    acc[static_cast<std::size_t>(lo) * plane + at] += (1.0 - frac) * e.polarity;
    acc[static_cast<std::size_t>(hi) * plane + at] += frac * e.polarity;
  }

  grid.values.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    grid.values[i] = static_cast<float>(acc[i]);
  }
  return grid;
}

GrayImage log_intensity(const GrayImage& linear, double floor_eps) {
  if (!(floor_eps > 0.0)) {
    throw ConfigError("log_intensity: floor must be > 0");
  }
  GrayImage out = linear;
  const float floor_f = static_cast<float>(floor_eps);
  for (float& v : out.data) v = std::log(std::max(v, floor_f));
  return out;
}

EventStream simulate_events(const GrayImage& log0, const GrayImage& log1,
                            double theta, std::uint64_t t0_us,
                            std::uint64_t t1_us) {
  if (!(theta > 0.0)) throw ConfigError("simulate_events: theta must be > 0");
  if (log0.width != log1.width || log0.height != log1.height) {
    throw ShapeError("simulate_events: frame geometries differ");
  }
  if (t1_us <= t0_us) throw ConfigError("simulate_events: need t1 > t0");

  EventStream stream;
  stream.width = log0.width;
  stream.height = log0.height;
  const std::uint64_t span = t1_us - t0_us;
  for (int y = 0; y < log0.height; ++y) {
    for (int x = 0; x < log0.width; ++x) {
      const double dl = static_cast<double>(log1.at(x, y)) - log0.at(x, y);
      const std::uint64_t n =
          static_cast<std::uint64_t>(std::floor(std::abs(dl) / theta));
      if (n == 0) continue;
      const std::int8_t p = dl > 0 ? 1 : -1;
      for (std::uint64_t k = 1; k <= n; ++k) {
        Event e;
        e.t_us = t0_us + (k * span + n - 1) / n;  // ceil: stays in (t0, t1]
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.polarity = p;
        stream.events.push_back(e);
      }
    }
  }
  std::stable_sort(
      stream.events.begin(), stream.events.end(),
      [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
  return stream;
}

EventActivity activity_map(const EventStream& stream, std::uint64_t t0_us,
                           std::uint64_t t1_us) {
  stream.validate();
  if (t1_us <= t0_us) throw ConfigError("activity_map: need t1 > t0");
  EventActivity activity;
  activity.width = stream.width;
  activity.height = stream.height;
  activity.t0_us = t0_us;
  activity.t1_us = t1_us;
  activity.counts.assign(
      static_cast<std::size_t>(stream.width) * stream.height, 0.0f);
  for (const Event& e : stream.events) {
    if (e.t_us < t0_us || e.t_us >= t1_us) continue;
    activity.at(e.x, e.y) += 1.0f;
  }
  return activity;
}

RateSeries event_rate(const EventStream& stream, double bin_width_us) {
  stream.validate();
  if (!(bin_width_us > 0.0)) {
    throw ConfigError("event_rate: bin width must be > 0");
  }
  RateSeries series;
  series.bin_width_us = bin_width_us;
  if (stream.events.empty()) return series;

  series.t_begin_us = stream.events.front().t_us;
  const std::uint64_t last = stream.events.back().t_us;
  const std::size_t nbins = static_cast<std::size_t>(std::floor(
                                static_cast<double>(last - series.t_begin_us) /
                                bin_width_us)) +
                            1;
  series.counts.assign(nbins, 0);
  for (const Event& e : stream.events) {
    std::size_t idx = static_cast<std::size_t>(
        static_cast<double>(e.t_us - series.t_begin_us) / bin_width_us);
    if (idx >= nbins) idx = nbins - 1;  // guard the exact upper edge
    ++series.counts[idx];
  }
  return series;
}

FlickerReport flicker_score(const EventStream& stream, double bin_width_us) {
  const RateSeries series = event_rate(stream, bin_width_us);
  const std::size_t n = series.counts.size();
  if (n < 20) {
    throw InsufficientDataError("flicker_score: stream spans " +
                                std::to_string(n) + " bins, need >= 20");
  }

  std::vector<double> centered(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += static_cast<double>(series.counts[i]);
  mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = static_cast<double>(series.counts[i]) - mean;
  }

  // Magnitude spectrum over the positive half, DC excluded.
  const std::size_t half = n / 2;
  double total = 0.0, peak = 0.0;
  std::size_t peak_k = 0;
  for (std::size_t k = 1; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(i) / static_cast<double>(n);
      re += centered[i] * std::cos(phi);
      im += centered[i] * std::sin(phi);
    }
    const double mag = std::hypot(re, im);
    total += mag;
    if (mag > peak) {
      peak = mag;
      peak_k = k;
    }
  }

  FlickerReport report;
  report.bin_width_us = bin_width_us;
  if (total < 1e-12) return report;  // flat spectrum: no periodicity
  report.dominant_frequency_hz =
      static_cast<double>(peak_k) /
      (static_cast<double>(n) * bin_width_us * 1e-6);
  report.periodicity_score = peak / total;
  return report;
}

std::pair<double, double> row_exposure_window(const ExposureMeta& meta,
                                              int row) {
  meta.validate();
  if (row < 0) throw RangeError("row_exposure_window: row must be >= 0");
  const double start =
      static_cast<double>(meta.frame_start_us) + row * meta.row_readout_delta_us;
  return {start, start + meta.exposure_time_us};
}

EventStream events_in_row_exposure(const EventStream& stream,
                                   const ExposureMeta& meta, int raw_row) {
  stream.validate();
  const auto [t_start, t_end] = row_exposure_window(meta, raw_row);
  const int event_row = raw_row / 2;  // RAW rows are twice the event rows
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  for (const Event& e : stream.events) {
    if (e.y != event_row) continue;
    const double t = static_cast<double>(e.t_us);
    if (t >= t_start && t < t_end) out.events.push_back(e);
  }
  return out;
}

double dynamic_range_db(double i_max, double i_min) {
  if (!(i_min > 0.0) || !(i_max > i_min)) {
    throw RangeError("dynamic_range_db: need i_max > i_min > 0");
  }
  return 20.0 * std::log10(i_max / i_min);
}

double temporal_resolution_hz(double delta_t_seconds) {
  if (!(delta_t_seconds > 0.0)) {
    throw RangeError("temporal_resolution_hz: delta_t must be > 0");
  }
  return 1.0 / delta_t_seconds;
}

}  // namespace hvsisp
