// hvsisp: command-line front end for the hybrid-vision-sensor ISP library.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hvsisp/calibration.hpp"
#include "hvsisp/color.hpp"
#include "hvsisp/errors.hpp"
#include "hvsisp/events.hpp"
#include "hvsisp/frame_io.hpp"
#include "hvsisp/metrics.hpp"
#include "hvsisp/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hvsisp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

unsigned thread_budget() {
  if (const char* env = std::getenv("HVSISP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Index-parallel loop with deterministic per-index outputs.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned threads = std::min<std::size_t>(thread_budget(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct Output {
  bool as_json = false;
  json payload;

  void set(const char* key, json value) { payload[key] = std::move(value); }
  void note(const std::string& line) {
    if (!as_json) std::cout << line << "\n";
  }
  void flush(const std::string& command) {
    if (as_json) {
      payload["command"] = command;
      payload["ok"] = true;
      std::cout << payload.dump(2) << "\n";
    }
  }
};

json wb_to_json(const WbGains& g) { return json{g.r, g.g, g.b}; }
json ccm_to_json(const Ccm& m) { return json{m.m[0], m.m[1], m.m[2]}; }

std::string format_gains(const WbGains& g) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "wb gains: %.6f %.6f %.6f", g.r, g.g, g.b);
  return buf;
}

GrayImage luminance_of_png(const fs::path& path) {
  const RgbImage linear = srgb_decode_image(read_rgb_png(path));
  GrayImage gray;
  gray.width = linear.width;
  gray.height = linear.height;
  gray.data.resize(static_cast<std::size_t>(gray.width) * gray.height);
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const float* px = linear.pixel(x, y);
      gray.at(x, y) = 0.2126729f * px[0] + 0.7151522f * px[1] +
                      0.0721750f * px[2];
    }
  }
  return gray;
}

struct ManifestEntry {
  fs::path frame;
  fs::path annotation;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  json j = json::parse(read_file_bytes(path), nullptr, false);
  if (j.is_discarded() || !j.is_array()) {
    throw ParseError("manifest: expected a JSON array of entries");
  }
  std::vector<ManifestEntry> entries;
  for (const json& e : j) {
    if (!e.contains("frame") || !e.contains("annotation")) {
      throw ParseError("manifest: every entry needs frame and annotation");
    }
    entries.push_back(ManifestEntry{fs::path(e["frame"].get<std::string>()),
                                    fs::path(e["annotation"].get<std::string>())});
  }
  return entries;
}

// ---------------------------------------------------------------- commands

int cmd_calibrate_dark(const std::vector<std::string>& inputs,
                       const fs::path& out, Output& output) {
  std::vector<QuadBayerFrame> frames;
  for (const std::string& p : inputs) frames.push_back(read_raw(p));
  if (frames.size() < 5) {
    const std::string warning = "calibrate-dark: only " +
                                std::to_string(frames.size()) +
                                " frame(s); five or more are recommended";
    std::cerr << "warning: " << warning << "\n";
    output.set("warnings", json::array({warning}));
  }
  const DarkCalibration calib = calibrate_dark(frames);
  write_dark_calibration(calib, out);
  output.set("blc", calib.blc);
  output.set("fpn_rows", calib.fpn.size());
  output.set("out", out.string());
  output.note("blc: " + std::to_string(calib.blc));
  output.note("calibration written to " + out.string());
  return kExitOk;
}

int cmd_run(const fs::path& raw_path, const fs::path& config_path,
            const std::string& calib_path, const std::string& checker_path,
            const std::string& events_path, const fs::path& out_png,
            const std::string& report_path, Output& output) {
  const QuadBayerFrame raw = read_raw(raw_path);
  const IspConfig config = read_isp_config(config_path);

  IspInputs inputs;
  if (!calib_path.empty()) {
    inputs.dark = read_dark_calibration(calib_path);
  } else if (config.dark.enabled && !config.dark.calibration_path.empty()) {
    inputs.dark = read_dark_calibration(config.dark.calibration_path);
  }
  if (!checker_path.empty()) {
    inputs.checker = read_checker_annotation(checker_path);
  }
  EventStream events;
  if (!events_path.empty()) {
    events = read_events(events_path);
    inputs.events = &events;
  }
  if (config.ccm.mode == CcmMode::kFit && !config.ccm.reference_path.empty()) {
    inputs.reference = read_reference_checker(config.ccm.reference_path);
  }
  if (config.ccm.mode == CcmMode::kFile && !config.ccm.matrix_path.empty()) {
    inputs.ccm = read_ccm_json(config.ccm.matrix_path);
  }

  const IspResult result = run_isp(raw, config, inputs);
  write_rgb_png(result.image, out_png);
  if (!report_path.empty()) {
    atomic_write_bytes(report_path, stage_report_to_json(result.report));
  }

  if (result.report.wb_gains) {
    output.note(format_gains(*result.report.wb_gains));
    output.set("wb_gains", wb_to_json(*result.report.wb_gains));
  }
  if (result.report.ccm) {
    const Ccm& m = *result.report.ccm;
    char buf[160];
    for (int r = 0; r < 3; ++r) {
      std::snprintf(buf, sizeof(buf), "ccm row %d: %9.6f %9.6f %9.6f", r,
                    m.m[r][0], m.m[r][1], m.m[r][2]);
      output.note(buf);
    }
    output.set("ccm", ccm_to_json(m));
  }
  if (result.report.fit) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "ccm fit objective: %.6f -> %.6f",
                  result.report.fit->initial_objective,
                  result.report.fit->final_objective);
    output.note(buf);
    output.set("fit",
               json{{"initial_objective", result.report.fit->initial_objective},
                    {"final_objective", result.report.fit->final_objective},
                    {"iterations", result.report.fit->iterations}});
  }
  output.set("out", out_png.string());
  output.note("image written to " + out_png.string());
  return kExitOk;
}

int cmd_ccm_fit(const fs::path& measured_path, const fs::path& reference_path,
                const fs::path& out, bool white_preserve,
                bool exposure_normalize, Output& output) {
  const PatchColors measured = read_patches_json(measured_path);
  const PatchColors reference = read_reference_checker(reference_path);
  FitOptions options;
  options.white_preserve = white_preserve;
  options.exposure_normalize = exposure_normalize;
  FitReport report;
  const Ccm ccm = fit_ccm(measured, reference, options, &report);
  write_ccm_json(ccm, out);

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "objective: initial %.6f, final %.6f, %d iterations%s",
                report.initial_objective, report.final_objective,
                report.iterations, report.converged ? "" : " (not converged)");
  output.note(buf);
  output.note("matrix written to " + out.string());
  output.set("ccm", ccm_to_json(ccm));
  output.set("fit", json{{"initial_objective", report.initial_objective},
                         {"final_objective", report.final_objective},
                         {"iterations", report.iterations},
                         {"converged", report.converged}});
  output.set("out", out.string());
  return kExitOk;
}

int cmd_events_voxelize(const fs::path& in, std::uint64_t t0, std::uint64_t t1,
                        int bins, const fs::path& out, Output& output) {
  const EventStream stream = read_events(in);
  const VoxelGrid grid = voxelize(stream, t0, t1, bins);
  write_voxel(grid, out);
  double mass = 0.0;
  for (float v : grid.values) mass += v;
  output.set("bins", grid.bins);
  output.set("signed_mass", mass);
  output.set("out", out.string());
  output.note("voxel grid written to " + out.string());
  return kExitOk;
}

int cmd_events_simulate(const fs::path& l0_path, const fs::path& l1_path,
                        double theta, double floor_eps, std::uint64_t t0,
                        std::uint64_t t1, const fs::path& out, Output& output) {
  const GrayImage i0 = luminance_of_png(l0_path);
  const GrayImage i1 = luminance_of_png(l1_path);
  const EventStream stream = simulate_events(
      log_intensity(i0, floor_eps), log_intensity(i1, floor_eps), theta, t0, t1);
  write_events(stream, out);
  output.set("events", stream.events.size());
  output.set("out", out.string());
  output.note(std::to_string(stream.events.size()) + " events written to " +
              out.string());
  return kExitOk;
}

int cmd_events_activity(const fs::path& in, std::uint64_t t0, std::uint64_t t1,
                        const fs::path& out, Output& output) {
  const EventStream stream = read_events(in);
  const EventActivity activity = activity_map(stream, t0, t1);
  VoxelGrid grid;  // single-bin voxel container for the activity plane
  grid.bins = 1;
  grid.height = activity.height;
  grid.width = activity.width;
  grid.values = activity.counts;
  write_voxel(grid, out);
  double total = 0.0;
  for (float v : activity.counts) total += v;
  output.set("total_events", total);
  output.set("out", out.string());
  output.note("activity map written to " + out.string());
  return kExitOk;
}

int cmd_events_rate(const fs::path& in, double bin_width_us,
                    const std::string& out, Output& output) {
  const EventStream stream = read_events(in);
  const RateSeries series = event_rate(stream, bin_width_us);
  std::string csv = "bin,t_start_us,count,rate_hz\n";
  for (std::size_t b = 0; b < series.counts.size(); ++b) {
    char row[128];
    std::snprintf(row, sizeof(row), "%zu,%.0f,%llu,%.6f\n", b,
                  static_cast<double>(series.t_begin_us) + b * bin_width_us,
                  static_cast<unsigned long long>(series.counts[b]),
                  series.rate_hz(b));
    csv += row;
  }
  if (out.empty()) {
    if (!output.as_json) std::cout << csv;
  } else {
    atomic_write_bytes(out, csv);
    output.note("rate series written to " + out);
  }
  output.set("bins", series.counts.size());
  if (!out.empty()) output.set("out", out);
  return kExitOk;
}

int cmd_events_flicker(const fs::path& in, double bin_width_us,
                       const std::string& out, Output& output) {
  const EventStream stream = read_events(in);
  const FlickerReport report = flicker_score(stream, bin_width_us);
  json j{{"dominant_frequency_hz", report.dominant_frequency_hz},
         {"periodicity_score", report.periodicity_score},
         {"bin_width_us", report.bin_width_us},
         {"flickering", report.periodicity_score > 0.3}};
  if (!out.empty()) {
    atomic_write_bytes(out, j.dump(2) + "\n");
    output.note("flicker report written to " + out);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "dominant %.2f Hz, score %.4f",
                report.dominant_frequency_hz, report.periodicity_score);
  output.note(buf);
  output.set("flicker", j);
  return kExitOk;
}

int cmd_eval(const fs::path& pred, const fs::path& ref,
             const std::vector<std::string>& metric_names, Output& output) {
  const RgbImage a = read_rgb_png(pred);
  const RgbImage b = read_rgb_png(ref);
  json results;
  for (const std::string& name : metric_names) {
    if (name == "psnr") {
      const double v = psnr(a, b);
      results["psnr"] = std::isinf(v) ? json("inf") : json(v);
    } else if (name == "ssim") {
      results["ssim"] = ssim(a, b);
    } else if (name == "l1") {
      results["l1"] = l1(a, b);
    } else {
      throw ConfigError("eval: unknown metric '" + name + "'");
    }
  }
  if (!output.as_json) std::cout << results.dump(2) << "\n";
  output.set("metrics", results);
  return kExitOk;
}

int cmd_report_color_accuracy(const fs::path& manifest_path,
                              const fs::path& reference_path,
                              const std::string& out_csv,
                              const std::string& out_json, Output& output) {
  const std::vector<ManifestEntry> entries = read_manifest(manifest_path);
  if (entries.empty()) throw EmptyInputError("report: manifest is empty");
  const PatchColors reference = read_reference_checker(reference_path);

  std::vector<RgbImage> frames(entries.size());
  std::vector<CheckerAnnotation> anns(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    frames[i] = read_rgb_png(entries[i].frame);
    anns[i] = read_checker_annotation(entries[i].annotation);
  });

  const ColorAccuracyReport report = color_accuracy(frames, anns, reference);

  std::string csv = "frame,frame_path,patch,de00,de_ab\n";
  for (std::size_t f = 0; f < report.frames.size(); ++f) {
    for (int p = 0; p < 24; ++p) {
      char row[512];
      std::snprintf(row, sizeof(row), "%zu,%s,%d,%.6f,%.6f\n", f,
                    entries[f].frame.string().c_str(), p + 1,
                    report.frames[f].de00[p], report.frames[f].de_ab[p]);
      csv += row;
    }
  }
  json agg{{"frames", report.frames.size()},
           {"mean_de00", report.mean_de00},
           {"median_de00", report.median_de00},
           {"mean_max_de00", report.mean_max_de00},
           {"mean_de_ab", report.mean_de_ab},
           {"median_de_ab", report.median_de_ab},
           {"mean_max_de_ab", report.mean_max_de_ab}};
  if (!out_csv.empty()) atomic_write_bytes(out_csv, csv);
  if (!out_json.empty()) atomic_write_bytes(out_json, agg.dump(2) + "\n");

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "de00 mean %.4f median %.4f mean-of-maxima %.4f",
                report.mean_de00, report.median_de00, report.mean_max_de00);
  output.note(buf);
  output.set("aggregates", agg);
  return kExitOk;
}

int cmd_report_stability(const fs::path& manifest_path,
                         const std::string& out_csv,
                         const std::string& out_json, Output& output) {
  const std::vector<ManifestEntry> entries = read_manifest(manifest_path);
  std::vector<RgbImage> frames(entries.size());
  std::vector<CheckerAnnotation> anns(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    frames[i] = read_rgb_png(entries[i].frame);
    anns[i] = read_checker_annotation(entries[i].annotation);
  });

  const StabilityReport report = temporal_stability(frames, anns);

  std::string csv = "frame,patch,r,g,b\n";
  for (std::size_t f = 0; f < report.series.size(); ++f) {
    for (int p = 0; p < 24; ++p) {
      char row[160];
      std::snprintf(row, sizeof(row), "%zu,%d,%.6f,%.6f,%.6f\n", f, p + 1,
                    report.series[f][p][0], report.series[f][p][1],
                    report.series[f][p][2]);
      csv += row;
    }
  }
  double worst = 0.0;
  json per_patch = json::array();
  for (double d : report.max_frame_diff) {
    per_patch.push_back(d);
    worst = std::max(worst, d);
  }
  json agg{{"frames", report.series.size()},
           {"max_frame_diff", per_patch},
           {"worst_patch_diff", worst}};
  if (!out_csv.empty()) atomic_write_bytes(out_csv, csv);
  if (!out_json.empty()) atomic_write_bytes(out_json, agg.dump(2) + "\n");

  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst per-patch frame diff: %.6f", worst);
  output.note(buf);
  output.set("aggregates", agg);
  return kExitOk;
}

int dispatch(const std::string& command, Output& output,
             const std::function<int()>& body) {
  try {
    const int code = body();
    if (code == kExitOk) output.flush(command);
    return code;
  } catch (const FitError& e) {
    if (output.as_json) {
      std::cout << json{{"ok", false}, {"command", command}, {"error", e.what()}}
                       .dump(2)
                << "\n";
    }
    std::cerr << "error: " << command << ": " << e.what() << "\n";
    return kExitInternal;
  } catch (const Error& e) {
    if (output.as_json) {
      std::cout << json{{"ok", false}, {"command", command}, {"error", e.what()}}
                       .dump(2)
                << "\n";
    }
    std::cerr << "error: " << command << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    if (output.as_json) {
      std::cout << json{{"ok", false}, {"command", command}, {"error", e.what()}}
                       .dump(2)
                << "\n";
    }
    std::cerr << "internal error: " << command << ": " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllable ISP and event analytics for quad-Bayer hybrid "
               "vision sensors"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON on stdout");

  // calibrate-dark
  auto* calibrate = app.add_subcommand(
      "calibrate-dark", "Derive black level and per-row fixed pattern noise");
  std::vector<std::string> calib_inputs;
  std::string calib_out;
  calibrate->add_option("inputs", calib_inputs, "dark RAW frames (PGM)")
      ->required();
  calibrate->add_option("--out", calib_out, "output calibration JSON")
      ->required();

  // run
  auto* run = app.add_subcommand("run", "Run the ISP pipeline on one frame");
  std::string run_raw, run_config, run_calib, run_checker, run_events,
      run_out, run_report;
  run->add_option("--raw", run_raw, "input RAW frame (PGM)")->required();
  run->add_option("--config", run_config, "pipeline config file")->required();
  run->add_option("--calib", run_calib, "dark calibration JSON");
  run->add_option("--checker", run_checker, "checker annotation JSON");
  run->add_option("--events", run_events, "event stream (EVT1 or CSV)");
  run->add_option("--out", run_out, "output PNG")->required();
  run->add_option("--report", run_report, "stage report JSON");

  // ccm-fit
  auto* ccm_fit = app.add_subcommand("ccm-fit",
                                     "Fit a color correction matrix");
  std::string fit_measured, fit_reference, fit_out;
  bool fit_white_preserve = false, fit_no_norm = false;
  ccm_fit->add_option("--measured", fit_measured, "measured patches JSON")
      ->required();
  ccm_fit->add_option("--reference", fit_reference,
                      "reference checker JSON (encoded sRGB)")
      ->required();
  ccm_fit->add_option("--out", fit_out, "output matrix JSON")->required();
  ccm_fit->add_flag("--white-preserve", fit_white_preserve,
                    "constrain the matrix to preserve gray");
  ccm_fit->add_flag("--no-exposure-normalize", fit_no_norm,
                    "skip patch-21 luminance normalization");

  // events
  auto* events = app.add_subcommand("events", "Event-stream analytics");
  events->require_subcommand(1);
  std::string ev_in, ev_out, ev_l0, ev_l1;
  std::uint64_t ev_t0 = 0, ev_t1 = 0;
  int ev_bins = 1;
  double ev_theta = 0.2, ev_floor = 1e-3, ev_bin_width = 1000.0;

  auto* voxelize_cmd = events->add_subcommand("voxelize",
                                              "Accumulate a voxel grid");
  voxelize_cmd->add_option("--in", ev_in)->required();
  voxelize_cmd->add_option("--t0", ev_t0)->required();
  voxelize_cmd->add_option("--t1", ev_t1)->required();
  voxelize_cmd->add_option("--bins", ev_bins)->required();
  voxelize_cmd->add_option("--out", ev_out)->required();

  auto* simulate_cmd = events->add_subcommand(
      "simulate", "Two-frame contrast-threshold event simulation");
  simulate_cmd->add_option("--l0", ev_l0, "earlier frame (PNG)")->required();
  simulate_cmd->add_option("--l1", ev_l1, "later frame (PNG)")->required();
  simulate_cmd->add_option("--theta", ev_theta, "log-intensity threshold");
  simulate_cmd->add_option("--floor", ev_floor, "log floor");
  simulate_cmd->add_option("--t0", ev_t0)->required();
  simulate_cmd->add_option("--t1", ev_t1)->required();
  simulate_cmd->add_option("--out", ev_out)->required();

  auto* activity_cmd = events->add_subcommand("activity",
                                              "Per-pixel event counts");
  activity_cmd->add_option("--in", ev_in)->required();
  activity_cmd->add_option("--t0", ev_t0)->required();
  activity_cmd->add_option("--t1", ev_t1)->required();
  activity_cmd->add_option("--out", ev_out)->required();

  auto* rate_cmd = events->add_subcommand("rate", "Global event rate series");
  rate_cmd->add_option("--in", ev_in)->required();
  rate_cmd->add_option("--bin-width", ev_bin_width, "bin width (us)");
  rate_cmd->add_option("--out", ev_out, "output CSV (stdout when omitted)");

  auto* flicker_cmd = events->add_subcommand(
      "flicker", "Spectral periodicity of the event rate");
  flicker_cmd->add_option("--in", ev_in)->required();
  flicker_cmd->add_option("--bin-width", ev_bin_width, "bin width (us)");
  flicker_cmd->add_option("--out", ev_out, "output JSON");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare two rendered images");
  std::string eval_pred, eval_ref;
  std::vector<std::string> eval_metrics{"psnr", "ssim", "l1"};
  eval->add_option("--pred", eval_pred)->required();
  eval->add_option("--ref", eval_ref)->required();
  eval->add_option("--metrics", eval_metrics, "subset of psnr,ssim,l1")
      ->delimiter(',');

  // report
  auto* report = app.add_subcommand("report", "Manifest-driven evaluation");
  report->require_subcommand(1);
  std::string rep_manifest, rep_reference, rep_csv, rep_json;

  auto* accuracy_cmd = report->add_subcommand(
      "color-accuracy", "Per-patch color errors against a reference checker");
  accuracy_cmd->add_option("--manifest", rep_manifest)->required();
  accuracy_cmd->add_option("--reference", rep_reference)->required();
  accuracy_cmd->add_option("--out-csv", rep_csv);
  accuracy_cmd->add_option("--out-json", rep_json);

  auto* stability_cmd = report->add_subcommand(
      "stability", "Frame-to-frame patch fluctuation");
  stability_cmd->add_option("--manifest", rep_manifest)->required();
  stability_cmd->add_option("--out-csv", rep_csv);
  stability_cmd->add_option("--out-json", rep_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  Output output;
  output.as_json = as_json;

  if (calibrate->parsed()) {
    return dispatch("calibrate-dark", output, [&]() {
      return cmd_calibrate_dark(calib_inputs, calib_out, output);
    });
  }
  if (run->parsed()) {
    return dispatch("run", output, [&]() {
      return cmd_run(run_raw, run_config, run_calib, run_checker, run_events,
                     run_out, run_report, output);
    });
  }
  if (ccm_fit->parsed()) {
    return dispatch("ccm-fit", output, [&]() {
      return cmd_ccm_fit(fit_measured, fit_reference, fit_out,
                         fit_white_preserve, !fit_no_norm, output);
    });
  }
  if (events->parsed()) {
    if (voxelize_cmd->parsed()) {
      return dispatch("events voxelize", output, [&]() {
        return cmd_events_voxelize(ev_in, ev_t0, ev_t1, ev_bins, ev_out,
                                   output);
      });
    }
    if (simulate_cmd->parsed()) {
      return dispatch("events simulate", output, [&]() {
        return cmd_events_simulate(ev_l0, ev_l1, ev_theta, ev_floor, ev_t0,
                                   ev_t1, ev_out, output);
      });
    }
    if (activity_cmd->parsed()) {
      return dispatch("events activity", output, [&]() {
        return cmd_events_activity(ev_in, ev_t0, ev_t1, ev_out, output);
      });
    }
    if (rate_cmd->parsed()) {
      return dispatch("events rate", output, [&]() {
        return cmd_events_rate(ev_in, ev_bin_width, ev_out, output);
      });
    }
    if (flicker_cmd->parsed()) {
      return dispatch("events flicker", output, [&]() {
        return cmd_events_flicker(ev_in, ev_bin_width, ev_out, output);
      });
    }
  }
  if (eval->parsed()) {
    return dispatch("eval", output, [&]() {
      return cmd_eval(eval_pred, eval_ref, eval_metrics, output);
    });
  }
  if (report->parsed()) {
    if (accuracy_cmd->parsed()) {
      return dispatch("report color-accuracy", output, [&]() {
        return cmd_report_color_accuracy(rep_manifest, rep_reference, rep_csv,
                                         rep_json, output);
      });
    }
    if (stability_cmd->parsed()) {
      return dispatch("report stability", output, [&]() {
        return cmd_report_stability(rep_manifest, rep_csv, rep_json, output);
      });
    }
  }
  return kExitInput;
}
