#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvsisp/color.hpp"
#include "hvsisp/types.hpp"

namespace hvsisp {

enum class WbMode { kChecker, kFixed };
enum class CcmMode { kFit, kFile, kIdentity };
enum class DenoiseMethod { kNone, kBilateral, kNlm };

// Declarative stage-by-stage configuration; parsed from flat dotted keys,
// e.g. `denoise.method=bilateral`.
struct IspConfig {
  struct {
    bool enabled = false;
    std::string calibration_path;  // optional; CLI loads it when set
  } dark;
  struct {
    bool guided = false;
  } holes;
  struct {
    double tau = 0.2;  // direction margin for event-guided interpolation
  } demosaic;
  struct {
    WbMode mode = WbMode::kFixed;
    WbGains gains;
  } wb;
  struct {
    bool enabled = true;
    double fraction = 0.95;
  } highlight;
  struct {
    DenoiseMethod method = DenoiseMethod::kNone;
    double sigma = 50.0 / 255.0;  // normalized intensity units
    bool event_weighted = false;
    double lambda = 1.0;  // activity decay for the detail-preservation weight
  } denoise;
  struct {
    CcmMode mode = CcmMode::kIdentity;
    bool white_preserve = false;
    bool exposure_normalize = true;
    std::string matrix_path;     // CcmMode::kFile
    std::string reference_path;  // CcmMode::kFit
  } ccm;
  struct {
    bool enabled = true;
  } gamma;

  void validate() const;  // ConfigError
};

IspConfig parse_isp_config(std::string_view text);
IspConfig read_isp_config(const std::filesystem::path& path);

struct StageStats {
  std::string name;
  double ms = 0.0;
  int channels = 1;  // 1 while the data is still a mosaic, 3 afterwards
  std::array<double, 3> min{}, max{}, mean{};
  std::vector<std::string> warnings;
};

struct StageReport {
  std::vector<StageStats> stages;
  std::optional<WbGains> wb_gains;
  std::optional<Ccm> ccm;
  std::optional<FitReport> fit;
};

std::string stage_report_to_json(const StageReport& report);

// Objects the stages need beyond the frame itself; all immutable during the
// run. `events` is borrowed and must outlive the call.
struct IspInputs {
  std::optional<DarkCalibration> dark;
  std::optional<CheckerAnnotation> checker;
  const EventStream* events = nullptr;
  std::optional<PatchColors> reference;  // CcmMode::kFit
  std::optional<Ccm> ccm;                // CcmMode::kFile
};

struct IspResult {
  RgbImage image;
  StageReport report;
};

// Fixed stage order: dark correction, hole fill, demosaic, white balance,
// highlight clip, denoise, CCM, gamma. Disabled stages are skipped (hole
// fill always runs; it is a demosaic precondition).
IspResult run_isp(const QuadBayerFrame& raw, const IspConfig& config,
                  const IspInputs& inputs = {});

// Spatial denoiser slot (bilateral or NLM behind one interface). When a
// weight map is supplied, out = w * img + (1 - w) * denoised, so w = 1
// preserves the input exactly.
RgbImage denoise(const RgbImage& linear_img, DenoiseMethod method,
                 double sigma, std::span<const float> weight = {});

}  // namespace hvsisp
