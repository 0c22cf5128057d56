#include "hvsisp/demosaic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvsisp/errors.hpp"

namespace hvsisp {

ColorSiteMap::ColorSiteMap(PatternPhase phase) {
  const int hole = static_cast<int>(phase);
  const SiteKind order[3] = {SiteKind::kRed, SiteKind::kGreen,
                             SiteKind::kBlue};
  int next = 0;
  for (int i = 0; i < 4; ++i) {
    block_[i] = (i == hole) ? SiteKind::kHole : order[next++];
  }
}

ColorSiteMap::ColorSiteMap(const std::array<SiteKind, 4>& block)
    : block_(block) {
  int counts[4] = {0, 0, 0, 0};
  for (SiteKind s : block_) ++counts[static_cast<int>(s)];
  if (counts[0] != 1 || counts[1] != 1 || counts[2] != 1 || counts[3] != 1) {
    throw InvariantError(
        "ColorSiteMap: block must contain exactly one R, G, B and hole");
  }
}

int ColorSiteMap::hole_index() const {
  for (int i = 0; i < 4; ++i) {
    if (block_[i] == SiteKind::kHole) return i;
  }
  return -1;  // unreachable for a validated map
}

namespace {

struct ActivityGradient {
  int width = 0;   // activity resolution
  int height = 0;
  std::vector<float> gx, gy;

  // Gradient at a frame pixel; activity is at half resolution.
  void at_frame(int x, int y, double* ogx, double* ogy) const {
    const std::size_t i =
        static_cast<std::size_t>(std::min(y / 2, height - 1)) * width +
        std::min(x / 2, width - 1);
    *ogx = gx[i];
    *ogy = gy[i];
  }
};

ActivityGradient activity_gradient(const EventActivity& activity) {
  ActivityGradient g;
  g.width = activity.width;
  g.height = activity.height;
  const std::size_t n =
      static_cast<std::size_t>(activity.width) * activity.height;
  g.gx.resize(n);
  g.gy.resize(n);
  auto clamp = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
  for (int y = 0; y < activity.height; ++y) {
    for (int x = 0; x < activity.width; ++x) {
      const float xm = activity.at(clamp(x - 1, 0, activity.width - 1), y);
      const float xp = activity.at(clamp(x + 1, 0, activity.width - 1), y);
      const float ym = activity.at(x, clamp(y - 1, 0, activity.height - 1));
      const float yp = activity.at(x, clamp(y + 1, 0, activity.height - 1));
      g.gx[static_cast<std::size_t>(y) * activity.width + x] = 0.5f * (xp - xm);
      g.gy[static_cast<std::size_t>(y) * activity.width + x] = 0.5f * (yp - ym);
    }
  }
  return g;
}

void require_half_resolution(const EventActivity& activity, int frame_width,
                             int frame_height, const char* op) {
  if (activity.width != frame_width / 2 ||
      activity.height != frame_height / 2) {
    throw ShapeError(std::string(op) + ": activity " +
                     std::to_string(activity.width) + "x" +
                     std::to_string(activity.height) +
                     " is not half of frame " + std::to_string(frame_width) +
                     "x" + std::to_string(frame_height));
  }
}

}  // namespace

double directional_weighted_mean(std::span<const double> values,
                                 std::span<const double> dx,
                                 std::span<const double> dy, double gx,
                                 double gy) {
  double wsum = 0.0, vsum = 0.0, plain = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double norm = std::hypot(dx[i], dy[i]);
    const double along =
        norm > 0.0 ? std::abs(gx * dx[i] + gy * dy[i]) / norm : 0.0;
    const double w = std::exp(-along);
    wsum += w;
    vsum += w * values[i];
    plain += values[i];
  }
  if (values.empty()) return 0.0;
  if (wsum < 1e-12) return plain / static_cast<double>(values.size());
  return vsum / wsum;
}

QuadBayerFrame fill_event_holes(const QuadBayerFrame& frame,
                                const EventActivity* guide) {
  frame.validate();
  ColorSiteMap map(frame.phase);
  ActivityGradient grad;
  if (guide) {
    require_half_resolution(*guide, frame.width, frame.height,
                            "fill_event_holes");
    grad = activity_gradient(*guide);
  }

  QuadBayerFrame out = frame;
  static constexpr int kDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  static constexpr int kDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (map.site(x, y) != SiteKind::kHole) continue;

      double values[8], dxs[8], dys[8];
      std::size_t count = 0;
      for (int dist = 1; dist <= 2 && count == 0; ++dist) {
        for (int d = 0; d < 8; ++d) {
          const int nx = x + kDx[d] * dist;
          const int ny = y + kDy[d] * dist;
          if (nx < 0 || ny < 0 || nx >= frame.width || ny >= frame.height) {
            continue;
          }
          if (map.site(nx, ny) != map.hole_channel()) continue;
          values[count] = frame.at(nx, ny);
          dxs[count] = kDx[d];
          dys[count] = kDy[d];
          ++count;
        }
      }
      if (count == 0) continue;  // no reachable donor; keep the raw sample

      double gx = 0.0, gy = 0.0;
      if (guide) grad.at_frame(x, y, &gx, &gy);
      const double fill = directional_weighted_mean(
          std::span<const double>(values, count),
          std::span<const double>(dxs, count),
          std::span<const double>(dys, count), gx, gy);
      const long v = std::lround(fill);
      out.at(x, y) = static_cast<std::uint16_t>(
          std::clamp<long>(v, 0, frame.max_value()));
    }
  }
  out.holes_filled = true;
  return out;
}

RgbImage demosaic(const QuadBayerFrame& frame) {
  frame.validate();
  if (!frame.holes_filled) {
    throw PreconditionError("demosaic: event holes must be filled first");
  }
  ColorSiteMap map(frame.phase);
  const int w = frame.width, h = frame.height;
  const float scale = 1.0f / static_cast<float>(frame.max_value());

  // Normalized mosaic plane.
  std::vector<float> m(frame.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = frame.data[i] * scale;
  auto at = [&](int x, int y) {
    return m[static_cast<std::size_t>(y) * w + x];
  };
  auto at_clamped = [&](int x, int y) {
    return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };

  RgbImage img;
  img.width = w;
  img.height = h;
  img.colorspace = ColorSpaceTag::kLinear;
  img.data.resize(3 * static_cast<std::size_t>(w) * h);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* px = img.pixel(x, y);
      const SiteKind native = map.effective_site(x, y);
      for (int c = 0; c < 3; ++c) {
        const SiteKind ch = static_cast<SiteKind>(c);
        if (ch == native) {
          px[c] = at(x, y);
          continue;
        }
        const bool h_avail = map.effective_site(x + 1, y) == ch;
        const bool v_avail = map.effective_site(x, y + 1) == ch;
        if (h_avail && v_avail) {
          // Direction with the smaller native-channel second difference.
          const float sd_h =
              std::abs(at_clamped(x - 2, y) - 2.0f * at(x, y) +
                       at_clamped(x + 2, y));
          const float sd_v =
              std::abs(at_clamped(x, y - 2) - 2.0f * at(x, y) +
                       at_clamped(x, y + 2));
          float h_est = 0.0f, v_est = 0.0f;
          {
            float sum = 0.0f;
            int n = 0;
            if (x - 1 >= 0) { sum += at(x - 1, y); ++n; }
            if (x + 1 < w) { sum += at(x + 1, y); ++n; }
            h_est = n ? sum / n : at(x, y);
            sum = 0.0f;
            n = 0;
            if (y - 1 >= 0) { sum += at(x, y - 1); ++n; }
            if (y + 1 < h) { sum += at(x, y + 1); ++n; }
            v_est = n ? sum / n : at(x, y);
          }
          px[c] = sd_h < sd_v ? h_est
                 : sd_v < sd_h ? v_est
                               : 0.5f * (h_est + v_est);
        } else if (h_avail) {
          float sum = 0.0f;
          int n = 0;
          if (x - 1 >= 0) { sum += at(x - 1, y); ++n; }
          if (x + 1 < w) { sum += at(x + 1, y); ++n; }
          px[c] = n ? sum / n : at(x, y);
        } else if (v_avail) {
          float sum = 0.0f;
          int n = 0;
          if (y - 1 >= 0) { sum += at(x, y - 1); ++n; }
          if (y + 1 < h) { sum += at(x, y + 1); ++n; }
          px[c] = n ? sum / n : at(x, y);
        } else {
          // Channel lives on the diagonal of this site.
          float sum = 0.0f;
          int n = 0;
          for (int dy = -1; dy <= 1; dy += 2) {
            for (int dx = -1; dx <= 1; dx += 2) {
              const int nx = x + dx, ny = y + dy;
              if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
              sum += at(nx, ny);
              ++n;
            }
          }
          px[c] = n ? sum / n : at(x, y);
        }
      }
    }
  }
  return img;
}

DirectionField event_guided_direction(const EventActivity& activity,
                                      int frame_width, int frame_height,
                                      double tau) {
  require_half_resolution(activity, frame_width, frame_height,
                          "event_guided_direction");
  if (tau < 0.0) throw ConfigError("event_guided_direction: tau must be >= 0");
  const ActivityGradient grad = activity_gradient(activity);

  DirectionField field;
  field.width = frame_width;
  field.height = frame_height;
  field.dirs.resize(static_cast<std::size_t>(frame_width) * frame_height,
                    Direction::kNone);
  for (int y = 0; y < frame_height; ++y) {
    for (int x = 0; x < frame_width; ++x) {
      double gx = 0.0, gy = 0.0;
      grad.at_frame(x, y, &gx, &gy);
      const double ax = std::abs(gx), ay = std::abs(gy);
      Direction d = Direction::kNone;
      // A dominant horizontal gradient marks a vertical edge: interpolate
      // along it, and vice versa.
      if (ax > (1.0 + tau) * ay && ax > 0.0) {
        d = Direction::kVertical;
      } else if (ay > (1.0 + tau) * ax && ay > 0.0) {
        d = Direction::kHorizontal;
      }
      field.dirs[static_cast<std::size_t>(y) * frame_width + x] = d;
    }
  }
  return field;
}

}  // namespace hvsisp
