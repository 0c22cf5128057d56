#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "hvsisp/types.hpp"

namespace hvsisp {

// RAW mosaic container: binary PGM (P5), maxval 65535, big-endian samples,
// with a metadata comment line `# hvs bit_depth=<n> phase=<0|1|2|3>`.
// A frame with exposure metadata carries an additional comment line
// `# exposure start_us=<i> row_delta_us=<f> time_us=<f>`.
QuadBayerFrame read_raw(const std::filesystem::path& path);
void write_raw(const QuadBayerFrame& frame, const std::filesystem::path& path);

// Event container, dispatched on extension:
//   *.csv      -> text, header `t_us,x,y,p`, one event per line; an optional
//                 leading `# width=<w> height=<h>` comment preserves geometry
//                 (inferred from coordinate extents when absent).
//   otherwise  -> binary EVT1: magic "EVT1" (the trailing digit is the format
//                 version), u16 LE width, u16 LE height, u64 LE count, then
//                 14-byte records {u64 LE t_us, u16 LE x, u16 LE y, i8 p, pad}.
EventStream read_events(const std::filesystem::path& path);
void write_events(const EventStream& stream, const std::filesystem::path& path);

// LabelMe-style annotation JSON: top-level `shapes` array of
// {label, points: [[x, y]]} plus imageWidth / imageHeight.
CheckerAnnotation parse_checker_annotation(std::string_view json_text);
CheckerAnnotation read_checker_annotation(const std::filesystem::path& path);

// 8-bit/channel RGB PNG; byte value = round(clamp(s, 0, 1) * 255).
void write_rgb_png(const RgbImage& img, const std::filesystem::path& path);
RgbImage read_rgb_png(const std::filesystem::path& path);

// Quantization rule used by the PNG writer, exposed for testing.
std::uint8_t quantize8(float sample);

// Voxel tensor: magic "VOX1", u16 LE bins, u16 LE height, u16 LE width,
// then f32 LE values in [bin][y][x] order.
void write_voxel(const VoxelGrid& grid, const std::filesystem::path& path);
VoxelGrid read_voxel(const std::filesystem::path& path);

// JSON carriers.
DarkCalibration read_dark_calibration(const std::filesystem::path& path);
void write_dark_calibration(const DarkCalibration& calib,
                            const std::filesystem::path& path);

// PatchColors as a bare JSON array of 24 [r, g, b] triplets in linear RGB.
PatchColors read_patches_json(const std::filesystem::path& path);
void write_patches_json(const PatchColors& patches,
                        const std::filesystem::path& path);

// Reference checker file: JSON array of 24 [r, g, b] in encoded sRGB,
// decoded to linear on load.
PatchColors read_reference_checker(const std::filesystem::path& path);

Ccm read_ccm_json(const std::filesystem::path& path);
void write_ccm_json(const Ccm& ccm, const std::filesystem::path& path);

// All writers stage to `<path>.tmp` and rename into place.
void atomic_write_bytes(const std::filesystem::path& path,
                        std::string_view bytes);
std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace hvsisp
