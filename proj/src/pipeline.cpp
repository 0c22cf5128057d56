#include "hvsisp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "hvsisp/calibration.hpp"
#include "hvsisp/demosaic.hpp"
#include "hvsisp/errors.hpp"
#include "hvsisp/events.hpp"
#include "hvsisp/frame_io.hpp"

namespace hvsisp {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: " + key + " must be true or false, got '" + v +
                    "'");
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

}  // namespace

void IspConfig::validate() const {
  if (!(demosaic.tau >= 0.0)) throw ConfigError("config: demosaic.tau must be >= 0");
  if (!(denoise.sigma >= 0.0)) throw ConfigError("config: denoise.sigma must be >= 0");
  if (!(denoise.lambda >= 0.0)) throw ConfigError("config: denoise.lambda must be >= 0");
  if (!(highlight.fraction > 0.0) || highlight.fraction > 1.0) {
    throw ConfigError("config: highlight.fraction must be in (0, 1]");
  }
  if (wb.mode == WbMode::kFixed &&
      (!(wb.gains.r > 0.0) || !(wb.gains.g > 0.0) || !(wb.gains.b > 0.0))) {
    throw ConfigError("config: wb.gains must be > 0");
  }
}

IspConfig parse_isp_config(std::string_view text) {
  IspConfig config;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "dark.enabled") {
      config.dark.enabled = parse_bool(value, key);
    } else if (key == "dark.calibration") {
      config.dark.calibration_path = value;
    } else if (key == "holes.guided") {
      config.holes.guided = parse_bool(value, key);
    } else if (key == "demosaic.tau") {
      config.demosaic.tau = parse_num(value, key);
    } else if (key == "wb.mode") {
      if (value == "checker") {
        config.wb.mode = WbMode::kChecker;
      } else if (value == "fixed") {
        config.wb.mode = WbMode::kFixed;
      } else {
        throw ConfigError("config: wb.mode must be checker or fixed");
      }
    } else if (key == "wb.gains") {
      double r = 0, g = 0, b = 0;
      char extra = 0;
      if (std::sscanf(value.c_str(), "%lf,%lf,%lf%c", &r, &g, &b, &extra) != 3) {
        throw ConfigError("config: wb.gains expects r,g,b");
      }
      config.wb.gains = WbGains{r, g, b};
    } else if (key == "highlight.enabled") {
      config.highlight.enabled = parse_bool(value, key);
    } else if (key == "highlight.fraction") {
      config.highlight.fraction = parse_num(value, key);
    } else if (key == "denoise.method") {
      if (value == "none") {
        config.denoise.method = DenoiseMethod::kNone;
      } else if (value == "bilateral") {
        config.denoise.method = DenoiseMethod::kBilateral;
      } else if (value == "nlm") {
        config.denoise.method = DenoiseMethod::kNlm;
      } else {
        throw ConfigError("config: denoise.method must be none, bilateral or nlm");
      }
    } else if (key == "denoise.sigma") {
      config.denoise.sigma = parse_num(value, key);
    } else if (key == "denoise.event_weighted") {
      config.denoise.event_weighted = parse_bool(value, key);
    } else if (key == "denoise.lambda") {
      config.denoise.lambda = parse_num(value, key);
    } else if (key == "ccm.mode") {
      if (value == "fit") {
        config.ccm.mode = CcmMode::kFit;
      } else if (value == "file") {
        config.ccm.mode = CcmMode::kFile;
      } else if (value == "identity") {
        config.ccm.mode = CcmMode::kIdentity;
      } else {
        throw ConfigError("config: ccm.mode must be fit, file or identity");
      }
    } else if (key == "ccm.white_preserve") {
      config.ccm.white_preserve = parse_bool(value, key);
    } else if (key == "ccm.exposure_normalize") {
      config.ccm.exposure_normalize = parse_bool(value, key);
    } else if (key == "ccm.file") {
      config.ccm.matrix_path = value;
    } else if (key == "ccm.reference") {
      config.ccm.reference_path = value;
    } else if (key == "gamma.enabled") {
      config.gamma.enabled = parse_bool(value, key);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

IspConfig read_isp_config(const std::filesystem::path& path) {
  return parse_isp_config(read_file_bytes(path));
}

std::string stage_report_to_json(const StageReport& report) {
  json j;
  j["stages"] = json::array();
  for (const StageStats& s : report.stages) {
    json js;
    js["name"] = s.name;
    js["ms"] = s.ms;
    js["channels"] = s.channels;
    js["min"] = std::vector<double>(s.min.begin(), s.min.begin() + s.channels);
    js["max"] = std::vector<double>(s.max.begin(), s.max.begin() + s.channels);
    js["mean"] = std::vector<double>(s.mean.begin(), s.mean.begin() + s.channels);
    js["warnings"] = s.warnings;
    j["stages"].push_back(js);
  }
  if (report.wb_gains) {
    j["wb_gains"] = {report.wb_gains->r, report.wb_gains->g, report.wb_gains->b};
  }
  if (report.ccm) {
    j["ccm"] = {report.ccm->m[0], report.ccm->m[1], report.ccm->m[2]};
  }
  if (report.fit) {
    j["fit"] = {{"initial_objective", report.fit->initial_objective},
                {"final_objective", report.fit->final_objective},
                {"iterations", report.fit->iterations},
                {"converged", report.fit->converged},
                {"exposure_normalized", report.fit->exposure_normalized},
                {"notes", report.fit->notes}};
  }
  return j.dump(2) + "\n";
}

// ------------------------------------------------------------------ denoise

namespace {

RgbImage denoise_bilateral(const RgbImage& img, double sigma) {
  constexpr int kRadius = 3;  // 7x7 window
  constexpr double kSigmaSpatial = 3.0;

  double spatial[2 * kRadius + 1][2 * kRadius + 1];
  for (int dy = -kRadius; dy <= kRadius; ++dy) {
    for (int dx = -kRadius; dx <= kRadius; ++dx) {
      spatial[dy + kRadius][dx + kRadius] = std::exp(
          -(dx * dx + dy * dy) / (2.0 * kSigmaSpatial * kSigmaSpatial));
    }
  }

  // Range kernel as a lookup over squared differences in [0, 1].
  constexpr int kLutSize = 1024;
  float lut[kLutSize];
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  for (int i = 0; i < kLutSize; ++i) {
    const double d2 = static_cast<double>(i) / (kLutSize - 1);
    lut[i] = static_cast<float>(std::exp(-d2 * inv_two_sigma2));
  }
  auto range_weight = [&](float diff) {
    int idx = static_cast<int>(diff * diff * (kLutSize - 1));
    return lut[std::min(idx, kLutSize - 1)];
  };

  RgbImage out = img;
  const int w = img.width, h = img.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int y0 = std::max(0, y - kRadius), y1 = std::min(h - 1, y + kRadius);
      const int x0 = std::max(0, x - kRadius), x1 = std::min(w - 1, x + kRadius);
      const float* center = img.pixel(x, y);
      float acc[3] = {0, 0, 0};
      float wacc[3] = {0, 0, 0};
      for (int ny = y0; ny <= y1; ++ny) {
        for (int nx = x0; nx <= x1; ++nx) {
          const float ws =
              static_cast<float>(spatial[ny - y + kRadius][nx - x + kRadius]);
          const float* p = img.pixel(nx, ny);
          for (int c = 0; c < 3; ++c) {
            const float wt = ws * range_weight(p[c] - center[c]);
            acc[c] += wt * p[c];
            wacc[c] += wt;
          }
        }
      }
      float* o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) o[c] = acc[c] / wacc[c];
    }
  }
  return out;
}

RgbImage denoise_nlm(const RgbImage& img, double sigma) {
  constexpr int kPatch = 1;   // 3x3 patches
  constexpr int kSearch = 5;  // 11x11 search window
  const double inv_h2 = 1.0 / (sigma * sigma);

  RgbImage out = img;
  const int w = img.width, h = img.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sy0 = std::max(0, y - kSearch), sy1 = std::min(h - 1, y + kSearch);
      const int sx0 = std::max(0, x - kSearch), sx1 = std::min(w - 1, x + kSearch);
      double acc[3] = {0, 0, 0};
      double wacc[3] = {0, 0, 0};
      for (int ny = sy0; ny <= sy1; ++ny) {
        for (int nx = sx0; nx <= sx1; ++nx) {
          // Mean squared patch difference per channel, patches clipped to
          // the image.
          double d2[3] = {0, 0, 0};
          int count = 0;
          for (int py = -kPatch; py <= kPatch; ++py) {
            for (int px = -kPatch; px <= kPatch; ++px) {
              const int ay = y + py, ax = x + px;
              const int by = ny + py, bx = nx + px;
              if (ay < 0 || ax < 0 || ay >= h || ax >= w) continue;
              if (by < 0 || bx < 0 || by >= h || bx >= w) continue;
              const float* pa = img.pixel(ax, ay);
              const float* pb = img.pixel(bx, by);
              for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(pa[c]) - pb[c];
                d2[c] += d * d;
              }
              ++count;
            }
          }
          const float* p = img.pixel(nx, ny);
          for (int c = 0; c < 3; ++c) {
            const double wt =
                count ? std::exp(-(d2[c] / count) * inv_h2) : 0.0;
            acc[c] += wt * p[c];
            wacc[c] += wt;
          }
        }
      }
      float* o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        if (wacc[c] > 0.0) o[c] = static_cast<float>(acc[c] / wacc[c]);
      }
    }
  }
  return out;
}

}  // namespace

RgbImage denoise(const RgbImage& img, DenoiseMethod method, double sigma,
                 std::span<const float> weight) {
  img.validate();
  if (!(sigma >= 0.0)) throw ConfigError("denoise: sigma must be >= 0");
  if (!weight.empty() &&
      weight.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ShapeError("denoise: weight map size != width * height");
  }

  RgbImage filtered;
  if (sigma == 0.0) {
    filtered = img;
  } else {
    switch (method) {
      case DenoiseMethod::kNone:
        filtered = img;
        break;
      case DenoiseMethod::kBilateral:
        filtered = denoise_bilateral(img, sigma);
        break;
      case DenoiseMethod::kNlm:
        filtered = denoise_nlm(img, sigma);
        break;
      default:
        throw ConfigError("denoise: unknown method");
    }
  }

  if (weight.empty()) return filtered;
  // out = w * original + (1 - w) * denoised; w = 1 keeps the input.
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float wv = weight[static_cast<std::size_t>(y) * img.width + x];
      const float* orig = img.pixel(x, y);
      float* o = filtered.pixel(x, y);
      for (int c = 0; c < 3; ++c) o[c] = wv * orig[c] + (1.0f - wv) * o[c];
    }
  }
  return filtered;
}

// ------------------------------------------------------------------ run_isp

namespace {

using Clock = std::chrono::steady_clock;

StageStats mosaic_stats(std::string name, double ms,
                        const QuadBayerFrame& frame) {
  StageStats s;
  s.name = std::move(name);
  s.ms = ms;
  s.channels = 1;
  double lo = frame.data.empty() ? 0.0 : frame.data[0];
  double hi = lo, sum = 0.0;
  for (std::uint16_t v : frame.data) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
    sum += v;
  }
  s.min[0] = lo;
  s.max[0] = hi;
  s.mean[0] = frame.data.empty() ? 0.0 : sum / static_cast<double>(frame.data.size());
  return s;
}

StageStats rgb_stats(std::string name, double ms, const RgbImage& img) {
  StageStats s;
  s.name = std::move(name);
  s.ms = ms;
  s.channels = 3;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < 3; ++c) {
    double lo = img.data[c], hi = img.data[c], sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = img.data[3 * i + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    s.min[c] = lo;
    s.max[c] = hi;
    s.mean[c] = sum / static_cast<double>(n);
  }
  return s;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

IspResult run_isp(const QuadBayerFrame& raw, const IspConfig& config,
                  const IspInputs& inputs) {
  config.validate();
  raw.validate();

  if (config.dark.enabled && !inputs.dark) {
    throw ConfigError("run_isp: stage dark: calibration required");
  }
  const bool needs_checker =
      config.wb.mode == WbMode::kChecker || config.ccm.mode == CcmMode::kFit;
  if (needs_checker && !inputs.checker) {
    throw ConfigError(std::string("run_isp: stage ") +
                      (config.wb.mode == WbMode::kChecker ? "white_balance"
                                                          : "ccm") +
                      ": checker annotation required");
  }
  const bool needs_events =
      config.holes.guided || config.denoise.event_weighted;
  if (needs_events && !inputs.events) {
    throw ConfigError(std::string("run_isp: stage ") +
                      (config.holes.guided ? "hole_fill" : "denoise") +
                      ": event stream required");
  }
  if (config.ccm.mode == CcmMode::kFit && !inputs.reference) {
    throw ConfigError("run_isp: stage ccm: reference checker required");
  }
  if (config.ccm.mode == CcmMode::kFile && !inputs.ccm) {
    throw ConfigError("run_isp: stage ccm: matrix required");
  }

  IspResult result;
  StageReport& report = result.report;

  std::optional<EventActivity> activity;
  if (needs_events) {
    const EventStream& ev = *inputs.events;
    std::uint64_t t0 = 0, t1 = 1;
    if (!ev.events.empty()) {
      t0 = ev.events.front().t_us;
      t1 = ev.events.back().t_us + 1;
    }
    activity = activity_map(ev, t0, t1);
  }

  QuadBayerFrame mosaic = raw;
  if (config.dark.enabled) {
    const auto start = Clock::now();
    mosaic = apply_dark_correction(mosaic, *inputs.dark);
    report.stages.push_back(mosaic_stats("dark", elapsed_ms(start), mosaic));
  }

  {
    const auto start = Clock::now();
    mosaic = fill_event_holes(
        mosaic, config.holes.guided ? &*activity : nullptr);
    report.stages.push_back(
        mosaic_stats("hole_fill", elapsed_ms(start), mosaic));
  }

  RgbImage img;
  {
    const auto start = Clock::now();
    img = demosaic(mosaic);
    report.stages.push_back(rgb_stats("demosaic", elapsed_ms(start), img));
  }

  std::optional<std::array<ImagePoint, 24>> centers;
  if (needs_checker) centers = patch_centers(*inputs.checker);

  {
    const auto start = Clock::now();
    WbGains gains = config.wb.gains;
    if (config.wb.mode == WbMode::kChecker) {
      gains = estimate_wb(extract_patches(img, *centers));
    }
    img = apply_wb(std::move(img), gains);
    report.wb_gains = gains;
    report.stages.push_back(
        rgb_stats("white_balance", elapsed_ms(start), img));
  }

  if (config.highlight.enabled) {
    const auto start = Clock::now();
    img = highlight_clip(std::move(img), config.highlight.fraction);
    report.stages.push_back(
        rgb_stats("highlight_clip", elapsed_ms(start), img));
  }

  if (config.denoise.method != DenoiseMethod::kNone) {
    const auto start = Clock::now();
    std::vector<float> weight;
    if (config.denoise.event_weighted) {
      // Detail-preservation weight grows with local event activity, so
      // static regions get the full denoiser and moving edges keep detail.
      weight.resize(static_cast<std::size_t>(img.width) * img.height);
      const EventActivity& act = *activity;
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          const int ax = std::min(x / 2, act.width - 1);
          const int ay = std::min(y / 2, act.height - 1);
          const double a = act.width > 0 && act.height > 0 ? act.at(ax, ay) : 0.0;
          weight[static_cast<std::size_t>(y) * img.width + x] =
              static_cast<float>(1.0 - std::exp(-config.denoise.lambda * a));
        }
      }
    }
    img = denoise(img, config.denoise.method, config.denoise.sigma, weight);
    report.stages.push_back(rgb_stats("denoise", elapsed_ms(start), img));
  }

  if (config.ccm.mode != CcmMode::kIdentity) {
    const auto start = Clock::now();
    Ccm ccm;
    if (config.ccm.mode == CcmMode::kFit) {
      FitOptions options;
      options.white_preserve = config.ccm.white_preserve;
      options.exposure_normalize = config.ccm.exposure_normalize;
      FitReport fit;
      ccm = fit_ccm(extract_patches(img, *centers), *inputs.reference, options,
                    &fit);
      report.fit = fit;
    } else {
      ccm = *inputs.ccm;
    }
    img = apply_ccm(std::move(img), ccm);
    report.ccm = ccm;
    StageStats stats = rgb_stats("ccm", elapsed_ms(start), img);
    if (report.fit && !report.fit->converged) {
      stats.warnings.push_back("ccm fit stopped at the iteration limit");
    }
    report.stages.push_back(std::move(stats));
  }

  if (config.gamma.enabled) {
    const auto start = Clock::now();
    img = srgb_encode_image(std::move(img));
    report.stages.push_back(rgb_stats("gamma", elapsed_ms(start), img));
  }

  result.image = std::move(img);
  return result;
}

}  // namespace hvsisp
