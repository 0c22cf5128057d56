#pragma once

#include <span>

#include "hvsisp/types.hpp"

namespace hvsisp {

// Average the dark frames, take the global minimum as the black level and
// the per-row mean of the remainder as the fixed-pattern vector.
DarkCalibration calibrate_dark(std::span<const QuadBayerFrame> frames);

// out(x, y) = max(0, round(in(x, y) - blc - fpn[y])), bit depth preserved.
QuadBayerFrame apply_dark_correction(const QuadBayerFrame& frame,
                                     const DarkCalibration& calib);

}  // namespace hvsisp
