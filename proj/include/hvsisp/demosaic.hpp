#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "hvsisp/types.hpp"

namespace hvsisp {

enum class SiteKind : std::uint8_t { kRed, kGreen, kBlue, kHole };

// Periodic channel assignment of the 2x2 quad block. The default layout
// places R, G, B in block scan order on the three non-hole positions, so
// for the usual lower-right hole: R top-left, G top-right, B bottom-left.
class ColorSiteMap {
 public:
  explicit ColorSiteMap(PatternPhase phase);
  explicit ColorSiteMap(const std::array<SiteKind, 4>& block);  // custom layout

  SiteKind site(int x, int y) const { return block_[(y & 1) * 2 + (x & 1)]; }
  int hole_index() const;  // block-local index 0..3

  // Channel used when interpolating at/through hole positions.
  SiteKind hole_channel() const { return hole_channel_; }
  void set_hole_channel(SiteKind c) { hole_channel_ = c; }

  // Effective channel with holes mapped to hole_channel(); only meaningful
  // once holes are filled.
  SiteKind effective_site(int x, int y) const {
    SiteKind s = site(x, y);
    return s == SiteKind::kHole ? hole_channel_ : s;
  }

 private:
  std::array<SiteKind, 4> block_;
  SiteKind hole_channel_ = SiteKind::kGreen;
};

// Fill every hole with the (optionally gradient-weighted) mean of the
// nearest same-channel sites in the 8-neighborhood at distance <= 2.
// With a guide, each neighbor direction d is weighted by
// exp(-|gradient . d|) of the event activity at the hole.
QuadBayerFrame fill_event_holes(const QuadBayerFrame& frame,
                                const EventActivity* guide = nullptr);

// Weighting rule used by the guided fill, exposed for testing: candidates
// are (value, dx, dy) stencil entries, gradient is (gx, gy) at the site.
double directional_weighted_mean(std::span<const double> values,
                                 std::span<const double> dx,
                                 std::span<const double> dy, double gx,
                                 double gy);

// Mosaic (holes filled) -> full-resolution linear RGB in [0, 1]. Native
// samples pass through; missing channels use directional interpolation with
// the direction chosen by the smaller native-channel second difference.
RgbImage demosaic(const QuadBayerFrame& frame);

enum class Direction : std::uint8_t { kNone, kHorizontal, kVertical };

struct DirectionField {
  int width = 0;
  int height = 0;
  std::vector<Direction> dirs;

  Direction at(int x, int y) const {
    return dirs[static_cast<std::size_t>(y) * width + x];
  }
};

// Classify each frame pixel's preferred interpolation direction from the
// activity gradient: a dominant |dE/dx| means a vertical edge, so interpolate
// vertically (along it), and vice versa. `tau` is the relative margin below
// which the directions tie to kNone. Activity must be at exactly half the
// frame resolution; it is upsampled by nearest neighbor.
DirectionField event_guided_direction(const EventActivity& activity,
                                      int frame_width, int frame_height,
                                      double tau = 0.2);

}  // namespace hvsisp
