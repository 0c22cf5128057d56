#include "hvsisp/frame_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "hvsisp/color.hpp"
#include "hvsisp/errors.hpp"

namespace hvsisp {

namespace {

using nlohmann::json;

void append_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint16_t load_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t load_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json parse_json(std::string_view text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ParseError(std::string(what) + ": invalid JSON");
  }
  return j;
}

json load_json(const std::filesystem::path& path, const char* what) {
  return parse_json(read_file_bytes(path), what);
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void atomic_write_bytes(const std::filesystem::path& path,
                        std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------- RAW / PGM

namespace {

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<std::string> comments;
  std::size_t data_offset = 0;
};

PgmHeader parse_pgm_header(const std::string& bytes) {
  PgmHeader h;
  std::size_t pos = 0;
  auto peek = [&]() -> int {
    return pos < bytes.size() ? static_cast<unsigned char>(bytes[pos]) : -1;
  };
  auto skip_space_and_comments = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(peek())) ++pos;
      if (peek() == '#') {
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos) eol = bytes.size();
        h.comments.emplace_back(bytes.substr(pos + 1, eol - pos - 1));
        pos = eol;
        continue;
      }
      break;
    }
  };
  auto next_token = [&]() -> std::string {
    skip_space_and_comments();
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(peek()) && peek() != '#') ++pos;
    if (start == pos) throw ParseError("PGM: truncated header");
    return bytes.substr(start, pos - start);
  };

  if (next_token() != "P5") throw ParseError("PGM: not a P5 file");
  auto parse_int = [](const std::string& tok, const char* what) {
    try {
      std::size_t used = 0;
      int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("PGM: bad ") + what + " token");
    }
  };
  h.width = parse_int(next_token(), "width");
  h.height = parse_int(next_token(), "height");
  h.maxval = parse_int(next_token(), "maxval");
  // Exactly one whitespace byte separates maxval from the raster.
  if (pos >= bytes.size() || !std::isspace(peek())) {
    throw ParseError("PGM: missing raster separator");
  }
  ++pos;
  h.data_offset = pos;
  return h;
}

// key=value scan inside a comment body.
bool comment_value(const std::string& comment, const std::string& key,
                   std::string* out) {
  std::size_t at = comment.find(key + "=");
  if (at == std::string::npos) return false;
  at += key.size() + 1;
  std::size_t end = at;
  while (end < comment.size() && !std::isspace(
             static_cast<unsigned char>(comment[end]))) {
    ++end;
  }
  *out = comment.substr(at, end - at);
  return true;
}

}  // namespace

QuadBayerFrame read_raw(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  PgmHeader h = parse_pgm_header(bytes);
  if (h.maxval != 65535) {
    throw ParseError("PGM: maxval must be 65535, got " +
                     std::to_string(h.maxval));
  }
  if (h.width <= 0 || h.height <= 0) {
    throw ParseError("PGM: non-positive dimensions");
  }

  QuadBayerFrame frame;
  frame.width = h.width;
  frame.height = h.height;
  frame.bit_depth = 10;
  frame.phase = PatternPhase::kBottomRight;

  for (const std::string& c : h.comments) {
    std::string v;
    if (c.find("hvs") != std::string::npos) {
      if (comment_value(c, "bit_depth", &v)) {
        int bd = 0;
        try {
          bd = std::stoi(v);
        } catch (const std::exception&) {
          throw ParseError("PGM: bad bit_depth in hvs comment");
        }
        if (bd < 1 || bd > 16) throw ParseError("PGM: bit_depth out of 1..16");
        frame.bit_depth = bd;
      }
      if (comment_value(c, "phase", &v)) {
        if (v.size() != 1 || v[0] < '0' || v[0] > '3') {
          throw ParseError("PGM: phase must be 0..3");
        }
        frame.phase = static_cast<PatternPhase>(v[0] - '0');
      }
    } else if (c.find("exposure") != std::string::npos) {
      ExposureMeta meta;
      std::string s, d, t;
      if (comment_value(c, "start_us", &s) &&
          comment_value(c, "row_delta_us", &d) &&
          comment_value(c, "time_us", &t)) {
        try {
          meta.frame_start_us = std::stoll(s);
          meta.row_readout_delta_us = std::stod(d);
          meta.exposure_time_us = std::stod(t);
        } catch (const std::exception&) {
          throw ParseError("PGM: bad exposure comment");
        }
        frame.exposure = meta;
      }
    }
  }

  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() - h.data_offset < count * 2) {
    throw ParseError("PGM: truncated raster");
  }
  frame.data.resize(count);
  const auto* p =
      reinterpret_cast<const unsigned char*>(bytes.data() + h.data_offset);
  const std::uint32_t limit = frame.max_value();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint16_t s =
        static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    if (s > limit) {
      throw RangeError("PGM: sample " + std::to_string(s) +
                       " exceeds bit depth " +
                       std::to_string(frame.bit_depth));
    }
    frame.data[i] = s;
  }
  frame.validate();
  return frame;
}

void write_raw(const QuadBayerFrame& frame, const std::filesystem::path& path) {
  frame.validate();
  std::string out;
  out.reserve(64 + frame.data.size() * 2);
  out += "P5\n";
  out += "# hvs bit_depth=" + std::to_string(frame.bit_depth) +
         " phase=" + std::to_string(static_cast<int>(frame.phase)) + "\n";
  if (frame.exposure) {
    const ExposureMeta& m = *frame.exposure;
    out += "# exposure start_us=" + std::to_string(m.frame_start_us) +
           " row_delta_us=" + format_double(m.row_readout_delta_us) +
           " time_us=" + format_double(m.exposure_time_us) + "\n";
  }
  out += std::to_string(frame.width) + " " + std::to_string(frame.height) +
         "\n65535\n";
  for (std::uint16_t s : frame.data) {
    out.push_back(static_cast<char>((s >> 8) & 0xff));  // big-endian
    out.push_back(static_cast<char>(s & 0xff));
  }
  atomic_write_bytes(path, out);
}

// ------------------------------------------------------------------- events

namespace {

constexpr char kEvtMagic[4] = {'E', 'V', 'T', '1'};
constexpr std::size_t kEvtHeaderSize = 16;
constexpr std::size_t kEvtRecordSize = 14;

EventStream read_events_binary(const std::string& bytes,
                               const std::string& name) {
  if (bytes.size() < kEvtHeaderSize ||
      std::memcmp(bytes.data(), kEvtMagic, 4) != 0) {
    throw ParseError(name + ": bad EVT1 magic/version");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  EventStream stream;
  stream.width = load_u16le(p + 4);
  stream.height = load_u16le(p + 6);
  const std::uint64_t count = load_u64le(p + 8);
  if (bytes.size() - kEvtHeaderSize < count * kEvtRecordSize) {
    throw ParseError(name + ": truncated event records");
  }
  stream.events.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const unsigned char* r = p + kEvtHeaderSize + i * kEvtRecordSize;
    Event& e = stream.events[i];
    e.t_us = load_u64le(r);
    e.x = load_u16le(r + 8);
    e.y = load_u16le(r + 10);
    e.polarity = static_cast<std::int8_t>(r[12]);
  }
  stream.validate();
  return stream;
}

std::string encode_events_binary(const EventStream& stream) {
  std::string out;
  out.reserve(kEvtHeaderSize + stream.events.size() * kEvtRecordSize);
  out.append(kEvtMagic, 4);
  append_u16le(out, static_cast<std::uint16_t>(stream.width));
  append_u16le(out, static_cast<std::uint16_t>(stream.height));
  append_u64le(out, stream.events.size());
  for (const Event& e : stream.events) {
    append_u64le(out, e.t_us);
    append_u16le(out, e.x);
    append_u16le(out, e.y);
    out.push_back(static_cast<char>(e.polarity));
    out.push_back('\0');
  }
  return out;
}

EventStream read_events_csv(const std::string& text, const std::string& name) {
  EventStream stream;
  bool have_geometry = false;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string w, h;
      if (comment_value(line, "width", &w) &&
          comment_value(line, "height", &h)) {
        try {
          stream.width = std::stoi(w);
          stream.height = std::stoi(h);
        } catch (const std::exception&) {
          throw ParseError(name + ": bad geometry comment");
        }
        have_geometry = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "t_us,x,y,p") {
        throw ParseError(name + ": expected header t_us,x,y,p");
      }
      have_header = true;
      continue;
    }
    Event e;
    long long t = 0, x = 0, y = 0, pol = 0;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lld%c", &t, &x, &y, &pol,
                    &extra) != 4 ||
        t < 0 || x < 0 || y < 0) {
      throw ParseError(name + ": bad event row: " + line);
    }
    if (pol != 1 && pol != -1) {
      throw RangeError(name + ": polarity must be -1 or +1");
    }
    if (x > std::numeric_limits<std::uint16_t>::max() ||
        y > std::numeric_limits<std::uint16_t>::max()) {
      throw RangeError(name + ": coordinate exceeds u16");
    }
    e.t_us = static_cast<std::uint64_t>(t);
    e.x = static_cast<std::uint16_t>(x);
    e.y = static_cast<std::uint16_t>(y);
    e.polarity = static_cast<std::int8_t>(pol);
    stream.events.push_back(e);
  }
  if (!have_header) throw ParseError(name + ": missing header t_us,x,y,p");
  if (!have_geometry) {
    int w = 0, h = 0;
    for (const Event& e : stream.events) {
      w = std::max(w, e.x + 1);
      h = std::max(h, e.y + 1);
    }
    stream.width = w;
    stream.height = h;
  }
  stream.validate();
  return stream;
}

std::string encode_events_csv(const EventStream& stream) {
  std::string out = "# width=" + std::to_string(stream.width) +
                    " height=" + std::to_string(stream.height) + "\n";
  out += "t_us,x,y,p\n";
  for (const Event& e : stream.events) {
    out += std::to_string(e.t_us) + "," + std::to_string(e.x) + "," +
           std::to_string(e.y) + "," + std::to_string(int(e.polarity)) + "\n";
  }
  return out;
}

bool is_csv(const std::filesystem::path& path) {
  return path.extension() == ".csv";
}

}  // namespace

EventStream read_events(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  return is_csv(path) ? read_events_csv(bytes, path.filename().string())
                      : read_events_binary(bytes, path.filename().string());
}

void write_events(const EventStream& stream,
                  const std::filesystem::path& path) {
  stream.validate();
  atomic_write_bytes(path, is_csv(path) ? encode_events_csv(stream)
                                        : encode_events_binary(stream));
}

// --------------------------------------------------------------- annotation

CheckerAnnotation parse_checker_annotation(std::string_view json_text) {
  json j = parse_json(json_text, "annotation");
  if (!j.contains("shapes") || !j["shapes"].is_array()) {
    throw ParseError("annotation: missing shapes array");
  }
  CheckerAnnotation ann;
  if (j.contains("imageWidth")) ann.image_width = j["imageWidth"].get<int>();
  if (j.contains("imageHeight")) ann.image_height = j["imageHeight"].get<int>();

  bool found[4] = {false, false, false, false};
  const char* labels[4] = {"cyan", "white", "brown", "black"};
  ImagePoint* slots[4] = {&ann.cyan, &ann.white, &ann.brown, &ann.black};
  for (const json& shape : j["shapes"]) {
    if (!shape.contains("label") || !shape.contains("points")) continue;
    const std::string label = shape["label"].get<std::string>();
    for (int i = 0; i < 4; ++i) {
      if (found[i] || label != labels[i]) continue;
      const json& pts = shape["points"];
      if (!pts.is_array() || pts.empty() || !pts[0].is_array() ||
          pts[0].size() < 2) {
        throw ParseError("annotation: shape '" + label + "' has no point");
      }
      slots[i]->x = pts[0][0].get<double>();
      slots[i]->y = pts[0][1].get<double>();
      found[i] = true;
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (!found[i]) {
      throw AnnotationError(std::string("missing label: ") + labels[i]);
    }
  }
  ann.validate();
  return ann;
}

CheckerAnnotation read_checker_annotation(const std::filesystem::path& path) {
  return parse_checker_annotation(read_file_bytes(path));
}

// ---------------------------------------------------------------------- PNG

std::uint8_t quantize8(float sample) {
  const float c = std::min(1.0f, std::max(0.0f, sample));
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

void write_rgb_png(const RgbImage& img, const std::filesystem::path& path) {
  img.validate();  // rejects NaN via finiteness
  for (float s : img.data) {
    if (std::isnan(s)) throw RangeError("png: NaN sample");
  }
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    bytes[i] = quantize8(img.data[i]);
  }

  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pi, nullptr, &size, 0, bytes.data(), 0,
                                 nullptr)) {
    throw IoError(std::string("png encode size failed: ") + pi.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&pi, out.data(), &size, 0, bytes.data(), 0,
                                 nullptr)) {
    throw IoError(std::string("png encode failed: ") + pi.message);
  }
  out.resize(size);
  atomic_write_bytes(path, out);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size())) {
    throw ParseError(path.string() + ": not a PNG: " + pi.message);
  }
  pi.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, raw.data(), 0, nullptr)) {
    throw ParseError(path.string() + ": PNG decode failed: " + pi.message);
  }
  RgbImage img;
  img.width = static_cast<int>(pi.width);
  img.height = static_cast<int>(pi.height);
  img.colorspace = ColorSpaceTag::kSrgb;
  img.data.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    img.data[i] = static_cast<float>(raw[i]) / 255.0f;
  }
  return img;
}

// --------------------------------------------------------------------- VOX1

namespace {
constexpr char kVoxMagic[4] = {'V', 'O', 'X', '1'};
}

void write_voxel(const VoxelGrid& grid, const std::filesystem::path& path) {
  for (float v : grid.values) {
    if (std::isnan(v)) throw RangeError("voxel: NaN value");
  }
  const std::size_t expect =
      static_cast<std::size_t>(grid.bins) * grid.height * grid.width;
  if (grid.values.size() != expect) {
    throw InvariantError("voxel: value count != bins * height * width");
  }
  std::string out;
  out.reserve(10 + grid.values.size() * 4);
  out.append(kVoxMagic, 4);
  append_u16le(out, static_cast<std::uint16_t>(grid.bins));
  append_u16le(out, static_cast<std::uint16_t>(grid.height));
  append_u16le(out, static_cast<std::uint16_t>(grid.width));
  for (float v : grid.values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  }
  atomic_write_bytes(path, out);
}

VoxelGrid read_voxel(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kVoxMagic, 4) != 0) {
    throw ParseError(path.string() + ": bad VOX1 magic");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  VoxelGrid grid;
  grid.bins = load_u16le(p + 4);
  grid.height = load_u16le(p + 6);
  grid.width = load_u16le(p + 8);
  const std::size_t count =
      static_cast<std::size_t>(grid.bins) * grid.height * grid.width;
  if (bytes.size() - 10 < count * 4) {
    throw ParseError(path.string() + ": truncated voxel data");
  }
  grid.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int k = 3; k >= 0; --k) bits = (bits << 8) | p[10 + 4 * i + k];
    float v;
    std::memcpy(&v, &bits, 4);
    grid.values[i] = v;
  }
  return grid;
}

// --------------------------------------------------------------------- JSON

DarkCalibration read_dark_calibration(const std::filesystem::path& path) {
  json j = load_json(path, "dark calibration");
  if (!j.contains("blc") || !j.contains("fpn") || !j["fpn"].is_array()) {
    throw ParseError("dark calibration: expected {blc, fpn}");
  }
  DarkCalibration calib;
  calib.blc = j["blc"].get<double>();
  calib.fpn = j["fpn"].get<std::vector<double>>();
  calib.validate();
  return calib;
}

void write_dark_calibration(const DarkCalibration& calib,
                            const std::filesystem::path& path) {
  calib.validate();
  json j;
  j["blc"] = calib.blc;
  j["fpn"] = calib.fpn;
  atomic_write_bytes(path, j.dump(2) + "\n");
}

namespace {

PatchColors patches_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 24) {
    throw ParseError(std::string(what) + ": expected 24 [r,g,b] entries, got " +
                     std::to_string(j.is_array() ? j.size() : 0));
  }
  PatchColors patches;
  for (int i = 0; i < 24; ++i) {
    if (!j[i].is_array() || j[i].size() != 3) {
      throw ParseError(std::string(what) + ": entry " + std::to_string(i + 1) +
                       " is not [r,g,b]");
    }
    for (int c = 0; c < 3; ++c) patches.rgb[i][c] = j[i][c].get<double>();
  }
  return patches;
}

}  // namespace

PatchColors read_patches_json(const std::filesystem::path& path) {
  PatchColors p = patches_from_json(load_json(path, "patches"), "patches");
  p.validate();
  return p;
}

void write_patches_json(const PatchColors& patches,
                        const std::filesystem::path& path) {
  patches.validate();
  json j = json::array();
  for (const auto& p : patches.rgb) j.push_back({p[0], p[1], p[2]});
  atomic_write_bytes(path, j.dump(2) + "\n");
}

PatchColors read_reference_checker(const std::filesystem::path& path) {
  PatchColors encoded =
      patches_from_json(load_json(path, "reference checker"),
                        "reference checker");
  PatchColors linear;
  for (int i = 0; i < 24; ++i) {
    for (int c = 0; c < 3; ++c) {
      linear.rgb[i][c] = srgb_decode(encoded.rgb[i][c]);
    }
  }
  linear.validate();
  return linear;
}

Ccm read_ccm_json(const std::filesystem::path& path) {
  json j = load_json(path, "ccm");
  if (!j.contains("matrix")) throw ParseError("ccm: expected {matrix}");
  const json& m = j["matrix"];
  if (!m.is_array() || m.size() != 3) throw ParseError("ccm: matrix must be 3x3");
  Ccm ccm;
  for (int r = 0; r < 3; ++r) {
    if (!m[r].is_array() || m[r].size() != 3) {
      throw ParseError("ccm: matrix must be 3x3");
    }
    for (int c = 0; c < 3; ++c) ccm.m[r][c] = m[r][c].get<double>();
  }
  for (const auto& row : ccm.m) {
    for (double v : row) {
      if (!std::isfinite(v)) throw InvariantError("ccm: non-finite entry");
    }
  }
  return ccm;
}

void write_ccm_json(const Ccm& ccm, const std::filesystem::path& path) {
  json j;
  j["matrix"] = {ccm.m[0], ccm.m[1], ccm.m[2]};
  atomic_write_bytes(path, j.dump(2) + "\n");
}

}  // namespace hvsisp
