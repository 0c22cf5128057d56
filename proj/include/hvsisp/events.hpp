#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hvsisp/types.hpp"

namespace hvsisp {

// Accumulate signed polarity into `bins` temporal slices; each event splits
// bilinearly between the two nearest bin centers, so the total signed mass
// of in-window events is preserved.
VoxelGrid voxelize(const EventStream& stream, std::uint64_t t0_us,
                   std::uint64_t t1_us, int bins);

// out = ln(max(img, floor_eps)).
GrayImage log_intensity(const GrayImage& linear, double floor_eps = 1e-3);

// Two-frame contrast-threshold model: per pixel emit floor(|dL| / theta)
// events of polarity sign(dL), timestamps uniformly spaced in (t0, t1].
EventStream simulate_events(const GrayImage& log0, const GrayImage& log1,
                            double theta, std::uint64_t t0_us,
                            std::uint64_t t1_us);

// Per-pixel event count (either polarity) within [t0, t1).
EventActivity activity_map(const EventStream& stream, std::uint64_t t0_us,
                           std::uint64_t t1_us);

struct RateSeries {
  double bin_width_us = 0.0;
  std::uint64_t t_begin_us = 0;  // start of bin 0
  std::vector<std::uint64_t> counts;

  double rate_hz(std::size_t bin) const {
    return static_cast<double>(counts[bin]) / (bin_width_us * 1e-6);
  }
};

// Global per-bin event counts over the stream's span.
RateSeries event_rate(const EventStream& stream, double bin_width_us);

// Spectral periodicity of the binned event rate: dominant frequency of the
// mean-subtracted counts and the fraction of (non-DC, half-spectrum)
// magnitude concentrated at the peak.
FlickerReport flicker_score(const EventStream& stream,
                            double bin_width_us = 1000.0);

// (t_start, t_end) of row r under rolling shutter; the window length is
// independent of r.
std::pair<double, double> row_exposure_window(const ExposureMeta& meta,
                                              int row);

// Events on the event-sensor row mapped from RAW row `raw_row` (RAW rows are
// twice the event rows) with t inside that row's exposure window, half-open.
EventStream events_in_row_exposure(const EventStream& stream,
                                   const ExposureMeta& meta, int raw_row);

// 20 * log10(i_max / i_min).
double dynamic_range_db(double i_max, double i_min);

// 1 / delta_t.
double temporal_resolution_hz(double delta_t_seconds);

}  // namespace hvsisp
