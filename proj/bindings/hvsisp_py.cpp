// Python bindings: numpy-centric access to the ISP pipeline, the color
// primitives, the event tools and the image metrics.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>

#include "hvsisp/calibration.hpp"
#include "hvsisp/color.hpp"
#include "hvsisp/demosaic.hpp"
#include "hvsisp/errors.hpp"
#include "hvsisp/events.hpp"
#include "hvsisp/frame_io.hpp"
#include "hvsisp/metrics.hpp"
#include "hvsisp/pipeline.hpp"

namespace py = pybind11;
using namespace hvsisp;

namespace {

using U16Array = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using I64Array = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

QuadBayerFrame frame_from_numpy(const U16Array& data, int bit_depth,
                                int phase) {
  if (data.ndim() != 2) throw ShapeError("frame data must be 2-D");
  QuadBayerFrame f;
  f.height = static_cast<int>(data.shape(0));
  f.width = static_cast<int>(data.shape(1));
  f.bit_depth = bit_depth;
  if (phase < 0 || phase > 3) throw RangeError("phase must be 0..3");
  f.phase = static_cast<PatternPhase>(phase);
  f.data.assign(data.data(), data.data() + data.size());
  f.validate();
  return f;
}

U16Array frame_to_numpy(const QuadBayerFrame& f) {
  U16Array out({f.height, f.width});
  std::memcpy(out.mutable_data(), f.data.data(),
              f.data.size() * sizeof(std::uint16_t));
  return out;
}

RgbImage rgb_from_numpy(const F32Array& data, bool srgb) {
  if (data.ndim() != 3 || data.shape(2) != 3) {
    throw ShapeError("image must have shape (H, W, 3)");
  }
  RgbImage img;
  img.height = static_cast<int>(data.shape(0));
  img.width = static_cast<int>(data.shape(1));
  img.colorspace = srgb ? ColorSpaceTag::kSrgb : ColorSpaceTag::kLinear;
  img.data.assign(data.data(), data.data() + data.size());
  return img;
}

F32Array rgb_to_numpy(const RgbImage& img) {
  F32Array out({img.height, img.width, 3});
  std::memcpy(out.mutable_data(), img.data.data(),
              img.data.size() * sizeof(float));
  return out;
}

GrayImage gray_from_numpy(const F32Array& data) {
  if (data.ndim() != 2) throw ShapeError("plane must be 2-D");
  GrayImage g;
  g.height = static_cast<int>(data.shape(0));
  g.width = static_cast<int>(data.shape(1));
  g.data.assign(data.data(), data.data() + data.size());
  return g;
}

EventStream stream_from_numpy(const I64Array& records, int width, int height) {
  if (records.ndim() != 2 || records.shape(1) != 4) {
    throw ShapeError("events must have shape (N, 4): t_us, x, y, p");
  }
  EventStream s;
  s.width = width;
  s.height = height;
  const auto r = records.unchecked<2>();
  s.events.resize(records.shape(0));
  for (py::ssize_t i = 0; i < records.shape(0); ++i) {
    Event& e = s.events[i];
    if (r(i, 0) < 0) throw RangeError("negative timestamp");
    e.t_us = static_cast<std::uint64_t>(r(i, 0));
    e.x = static_cast<std::uint16_t>(r(i, 1));
    e.y = static_cast<std::uint16_t>(r(i, 2));
    e.polarity = static_cast<std::int8_t>(r(i, 3));
  }
  s.validate();
  return s;
}

I64Array stream_to_numpy(const EventStream& s) {
  I64Array out({static_cast<py::ssize_t>(s.events.size()), py::ssize_t(4)});
  auto r = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    r(i, 0) = static_cast<std::int64_t>(s.events[i].t_us);
    r(i, 1) = s.events[i].x;
    r(i, 2) = s.events[i].y;
    r(i, 3) = s.events[i].polarity;
  }
  return out;
}

PatchColors patches_from_numpy(const F64Array& data) {
  if (data.ndim() != 2 || data.shape(0) != 24 || data.shape(1) != 3) {
    throw ShapeError("patches must have shape (24, 3)");
  }
  PatchColors p;
  const auto r = data.unchecked<2>();
  for (int i = 0; i < 24; ++i) {
    for (int c = 0; c < 3; ++c) p.rgb[i][c] = r(i, c);
  }
  return p;
}

F64Array patches_to_numpy(const PatchColors& p) {
  F64Array out({py::ssize_t(24), py::ssize_t(3)});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < 24; ++i) {
    for (int c = 0; c < 3; ++c) r(i, c) = p.rgb[i][c];
  }
  return out;
}

Ccm ccm_from_numpy(const F64Array& data) {
  if (data.ndim() != 2 || data.shape(0) != 3 || data.shape(1) != 3) {
    throw ShapeError("matrix must have shape (3, 3)");
  }
  Ccm m;
  const auto r = data.unchecked<2>();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.m[i][j] = r(i, j);
  }
  return m;
}

F64Array ccm_to_numpy(const Ccm& m) {
  F64Array out({py::ssize_t(3), py::ssize_t(3)});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = m.m[i][j];
  }
  return out;
}

py::dict fit_report_to_dict(const FitReport& report) {
  py::dict d;
  d["initial_objective"] = report.initial_objective;
  d["final_objective"] = report.final_objective;
  d["iterations"] = report.iterations;
  d["converged"] = report.converged;
  d["exposure_normalized"] = report.exposure_normalized;
  return d;
}

}  // namespace

PYBIND11_MODULE(hvsisp, m) {
  m.doc() = "Controllable ISP and event analytics for quad-Bayer hybrid "
            "vision sensors";

  py::register_exception<Error>(m, "HvsispError");

  py::class_<QuadBayerFrame>(m, "QuadBayerFrame")
      .def(py::init(&frame_from_numpy), py::arg("data"),
           py::arg("bit_depth") = 10, py::arg("phase") = 3)
      .def_readonly("width", &QuadBayerFrame::width)
      .def_readonly("height", &QuadBayerFrame::height)
      .def_readonly("bit_depth", &QuadBayerFrame::bit_depth)
      .def_readonly("holes_filled", &QuadBayerFrame::holes_filled)
      .def_property_readonly(
          "phase",
          [](const QuadBayerFrame& f) { return static_cast<int>(f.phase); })
      .def_property_readonly("data", &frame_to_numpy);

  py::class_<EventStream>(m, "EventStream")
      .def(py::init(&stream_from_numpy), py::arg("records"), py::arg("width"),
           py::arg("height"))
      .def_readonly("width", &EventStream::width)
      .def_readonly("height", &EventStream::height)
      .def_property_readonly("records", &stream_to_numpy)
      .def("__len__",
           [](const EventStream& s) { return s.events.size(); });

  // File I/O.
  m.def("read_raw", [](const std::string& p) { return read_raw(p); });
  m.def("write_raw", [](const QuadBayerFrame& f, const std::string& p) {
    write_raw(f, p);
  });
  m.def("read_events", [](const std::string& p) { return read_events(p); });
  m.def("write_events", [](const EventStream& s, const std::string& p) {
    write_events(s, p);
  });
  m.def("read_png",
        [](const std::string& p) { return rgb_to_numpy(read_rgb_png(p)); });
  m.def("write_png", [](const F32Array& img, const std::string& p) {
    write_rgb_png(rgb_from_numpy(img, true), p);
  });

  // Calibration.
  m.def("calibrate_dark", [](const std::vector<QuadBayerFrame>& frames) {
    const DarkCalibration calib = calibrate_dark(frames);
    return py::make_tuple(calib.blc, calib.fpn);
  });
  m.def("apply_dark_correction",
        [](const QuadBayerFrame& f, double blc, const std::vector<double>& fpn) {
          DarkCalibration calib;
          calib.blc = blc;
          calib.fpn = fpn;
          return apply_dark_correction(f, calib);
        },
        py::arg("frame"), py::arg("blc"), py::arg("fpn"));

  // Demosaicing.
  m.def("fill_event_holes",
        [](const QuadBayerFrame& f) { return fill_event_holes(f); });
  m.def("demosaic",
        [](const QuadBayerFrame& f) { return rgb_to_numpy(demosaic(f)); });

  // Color primitives.
  m.def("srgb_encode", py::vectorize(&srgb_encode));
  m.def("srgb_decode", py::vectorize(&srgb_decode));
  m.def("linear_to_lab", [](double r, double g, double b) {
    const LabColor lab = linear_to_lab(r, g, b);
    return py::make_tuple(lab.L, lab.a, lab.b);
  });
  m.def("ciede2000", [](const std::array<double, 3>& a,
                        const std::array<double, 3>& b) {
    return ciede2000(LabColor{a[0], a[1], a[2]}, LabColor{b[0], b[1], b[2]});
  });
  m.def("delta_e_ab", [](const std::array<double, 3>& a,
                         const std::array<double, 3>& b) {
    return delta_e_ab(LabColor{a[0], a[1], a[2]}, LabColor{b[0], b[1], b[2]});
  });
  m.def("estimate_wb", [](const F64Array& patches) {
    const WbGains g = estimate_wb(patches_from_numpy(patches));
    return py::make_tuple(g.r, g.g, g.b);
  });
  m.def(
      "fit_ccm",
      [](const F64Array& measured, const F64Array& reference,
         bool white_preserve, bool exposure_normalize) {
        FitOptions options;
        options.white_preserve = white_preserve;
        options.exposure_normalize = exposure_normalize;
        FitReport report;
        const Ccm ccm = fit_ccm(patches_from_numpy(measured),
                                patches_from_numpy(reference), options, &report);
        return py::make_tuple(ccm_to_numpy(ccm), fit_report_to_dict(report));
      },
      py::arg("measured"), py::arg("reference"),
      py::arg("white_preserve") = false, py::arg("exposure_normalize") = true);

  // Pipeline.
  m.def(
      "run_isp",
      [](const QuadBayerFrame& raw, const std::string& config_text,
         std::optional<py::tuple> dark, std::optional<std::string> checker_json,
         const EventStream* events, std::optional<F64Array> reference_encoded,
         std::optional<F64Array> ccm) {
        const IspConfig config = parse_isp_config(config_text);
        IspInputs inputs;
        if (dark) {
          DarkCalibration calib;
          calib.blc = dark->begin()->cast<double>();
          calib.fpn = (*dark)[1].cast<std::vector<double>>();
          inputs.dark = calib;
        }
        if (checker_json) {
          inputs.checker = parse_checker_annotation(*checker_json);
        }
        inputs.events = events;
        if (reference_encoded) {
          PatchColors linear = patches_from_numpy(*reference_encoded);
          for (auto& p : linear.rgb) {
            for (double& c : p) c = srgb_decode(c);
          }
          inputs.reference = linear;
        }
        if (ccm) inputs.ccm = ccm_from_numpy(*ccm);
        const IspResult result = run_isp(raw, config, inputs);
        return py::make_tuple(rgb_to_numpy(result.image),
                              stage_report_to_json(result.report));
      },
      py::arg("raw"), py::arg("config"), py::arg("dark") = std::nullopt,
      py::arg("checker_json") = std::nullopt, py::arg("events") = nullptr,
      py::arg("reference_encoded") = std::nullopt,
      py::arg("ccm") = std::nullopt);

  // Events.
  m.def("voxelize", [](const EventStream& s, std::uint64_t t0, std::uint64_t t1,
                       int bins) {
    const VoxelGrid g = voxelize(s, t0, t1, bins);
    F32Array out({g.bins, g.height, g.width});
    std::memcpy(out.mutable_data(), g.values.data(),
                g.values.size() * sizeof(float));
    return out;
  });
  m.def("log_intensity", [](const F32Array& img, double floor_eps) {
    const GrayImage out = log_intensity(gray_from_numpy(img), floor_eps);
    F32Array arr({out.height, out.width});
    std::memcpy(arr.mutable_data(), out.data.data(),
                out.data.size() * sizeof(float));
    return arr;
  }, py::arg("img"), py::arg("floor_eps") = 1e-3);
  m.def("simulate_events",
        [](const F32Array& log0, const F32Array& log1, double theta,
           std::uint64_t t0, std::uint64_t t1) {
          return simulate_events(gray_from_numpy(log0), gray_from_numpy(log1),
                                 theta, t0, t1);
        });
  m.def("activity_map", [](const EventStream& s, std::uint64_t t0,
                           std::uint64_t t1) {
    const EventActivity a = activity_map(s, t0, t1);
    F32Array out({a.height, a.width});
    std::memcpy(out.mutable_data(), a.counts.data(),
                a.counts.size() * sizeof(float));
    return out;
  });
  m.def("flicker_score", [](const EventStream& s, double bin_width_us) {
    const FlickerReport r = flicker_score(s, bin_width_us);
    py::dict d;
    d["dominant_frequency_hz"] = r.dominant_frequency_hz;
    d["periodicity_score"] = r.periodicity_score;
    d["bin_width_us"] = r.bin_width_us;
    return d;
  }, py::arg("stream"), py::arg("bin_width_us") = 1000.0);
  m.def("dynamic_range_db", &dynamic_range_db);
  m.def("temporal_resolution_hz", &temporal_resolution_hz);

  // Metrics.
  m.def("psnr", [](const F32Array& a, const F32Array& b, double peak) {
    return psnr(rgb_from_numpy(a, true), rgb_from_numpy(b, true), peak);
  }, py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);
  m.def("ssim", [](const F32Array& a, const F32Array& b) {
    return ssim(rgb_from_numpy(a, true), rgb_from_numpy(b, true));
  });
  m.def("l1", [](const F32Array& a, const F32Array& b) {
    return l1(rgb_from_numpy(a, true), rgb_from_numpy(b, true));
  });
}
