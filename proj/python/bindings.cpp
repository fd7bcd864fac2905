// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the gt360 core: domain operations, metrics and the
// full inference system.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gt360/data.hpp"
#include "gt360/eval.hpp"
#include "gt360/geometry.hpp"
#include "gt360/pipeline.hpp"
#include "gt360/train.hpp"

namespace py = pybind11;
using namespace gt360;

namespace {

FrameImage image_from_array(const py::array_t<uint8_t>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 3 || buf.shape[2] != 3)
    throw ShapeError("image must be an (H, W, 3) uint8 array");
  FrameImage img(static_cast<int>(buf.shape[1]), static_cast<int>(buf.shape[0]));
  const auto view = arr.unchecked<3>();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = view(y, x, c);
  return img;
}

py::array_t<uint8_t> image_to_array(const FrameImage& img) {
  py::array_t<uint8_t> arr({img.height(), img.width(), 3});
  auto view = arr.mutable_unchecked<3>();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) view(y, x, c) = img.at(x, y, c);
  return arr;
}

HeatmapGrid heatmap_from_array(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2 || buf.shape[0] != HeatmapGrid::kSize ||
      buf.shape[1] != HeatmapGrid::kSize)
    throw ShapeError("heatmap must be a (64, 64) float array");
  const auto view = arr.unchecked<2>();
  HeatmapGrid hm;
  for (int r = 0; r < HeatmapGrid::kSize; ++r)
    for (int c = 0; c < HeatmapGrid::kSize; ++c) hm.at(r, c) = view(r, c);
  return hm;
}

py::array_t<double> heatmap_to_array(const HeatmapGrid& hm) {
  py::array_t<double> arr({HeatmapGrid::kSize, HeatmapGrid::kSize});
  auto view = arr.mutable_unchecked<2>();
  for (int r = 0; r < HeatmapGrid::kSize; ++r)
    for (int c = 0; c < HeatmapGrid::kSize; ++c) view(r, c) = hm.at(r, c);
  return arr;
}

HeadBox box_from_tuple(const std::vector<double>& b) {
  if (b.size() != 4 && b.size() != 5)
    throw Error("box must be (x0, y0, x1, y1[, confidence])");
  return {b[0], b[1], b[2], b[3], b.size() == 5 ? b[4] : 1.0};
}

py::dict verdict_to_dict(const GazeVerdict& v) {
  py::dict d;
  d["box"] = py::make_tuple(v.head.x_min, v.head.y_min, v.head.x_max, v.head.y_max);
  d["class"] = to_string(v.cls);
  d["p_ec"] = v.p_ec;
  d["p_ift"] = v.p_ift ? py::object(py::float_(*v.p_ift)) : py::none();
  d["target"] = v.target_point
                    ? py::object(py::make_tuple(v.target_point->x, v.target_point->y))
                    : py::none();
  d["heatmap"] = v.heatmap ? py::object(heatmap_to_array(*v.heatmap)) : py::none();
  return d;
}

// Inference system wrapper with caller-supplied head boxes.
class PySystem {
 public:
  PySystem(uint64_t seed, double sigma, int input_size, int patch_size,
           int embed_dim, int encoder_blocks, const std::string& ec_weights,
           const std::string& gaze_weights) {
    pipeline::SystemConfig cfg;
    cfg.pipeline.sigma = sigma;
    cfg.pipeline.input_width = input_size;
    cfg.pipeline.input_height = input_size;
    cfg.detector_backend = "scripted";
    cfg.ec_weights = ec_weights;
    cfg.gaze_weights = gaze_weights;
    cfg.ec_config.seed = Rng::derive(seed, "ec");
    cfg.encoder_config.input_size = input_size;
    cfg.encoder_config.patch_size = patch_size;
    cfg.encoder_config.embed_dim = embed_dim;
    cfg.encoder_config.blocks = encoder_blocks;
    cfg.encoder_config.seed = Rng::derive(seed, "encoder");
    cfg.decoder_config.token_grid = cfg.encoder_config.tokens_per_side();
    cfg.decoder_config.encoder_dim = embed_dim;
    cfg.decoder_config.msf.fusion_channels = embed_dim;
    cfg.decoder_config.seed = Rng::derive(seed, "decoder");
    system_ = std::make_unique<pipeline::Gt360System>(
        pipeline::Gt360System::create(cfg));
  }

  py::list infer(const py::array_t<uint8_t>& image,
                 const std::vector<std::vector<double>>& boxes) {
    const FrameImage img = image_from_array(image);
    std::vector<HeadBox> head_boxes;
    for (const auto& b : boxes) head_boxes.push_back(box_from_tuple(b));
    py::list out;
    for (const auto& r : system_->infer_boxes(img, head_boxes)) {
      if (r) {
        out.append(verdict_to_dict(r.value()));
      } else {
        py::dict d;
        d["error"] = r.error();
        out.append(d);
      }
    }
    return out;
  }

  py::array_t<uint8_t> render(const py::array_t<uint8_t>& image,
                              const std::vector<std::vector<double>>& boxes) {
    const FrameImage img = image_from_array(image);
    std::vector<HeadBox> head_boxes;
    for (const auto& b : boxes) head_boxes.push_back(box_from_tuple(b));
    std::vector<GazeVerdict> verdicts;
    for (const auto& r : system_->infer_boxes(img, head_boxes))
      if (r) verdicts.push_back(r.value());
    return image_to_array(pipeline::render_overlay(img, verdicts));
  }

  uint64_t gaze_invocations() const { return system_->gaze_invocations(); }

 private:
  std::unique_ptr<pipeline::Gt360System> system_;
};

}  // namespace

PYBIND11_MODULE(_gt360, m) {
  m.doc() = "gt360: 360-degree gaze target estimation (EC / OFT / IFT)";

  py::register_exception<Error>(m, "Gt360Error");

  m.def(
      "classify",
      [](double p_ec, double p_ift, double sigma) {
        PipelineConfig cfg;
        cfg.sigma = sigma;
        return std::string(to_string(pipeline::classify(p_ec, p_ift, cfg)));
      },
      py::arg("p_ec"), py::arg("p_ift"), py::arg("sigma") = 0.85,
      "Three-way EC/OFT/IFT decision");

  m.def(
      "argmax_point",
      [](const py::array_t<double>& hm) {
        const Point p = argmax_point(heatmap_from_array(hm));
        return py::make_tuple(p.x, p.y);
      },
      py::arg("heatmap"));

  m.def(
      "centroid_point",
      [](const py::array_t<double>& hm) {
        const Point p = centroid_point(heatmap_from_array(hm));
        return py::make_tuple(p.x, p.y);
      },
      py::arg("heatmap"));

  m.def(
      "crop_head",
      [](const py::array_t<uint8_t>& image, const std::vector<double>& box,
         double pad) {
        return image_to_array(
            crop_head(image_from_array(image), box_from_tuple(box), pad));
      },
      py::arg("image"), py::arg("box"), py::arg("pad") = 0.0);

  m.def(
      "build_gt_heatmap",
      [](double x, double y, double sigma_px) {
        return heatmap_to_array(
            data::build_gt_heatmap({x, y}, HeatmapGrid::kSize, sigma_px));
      },
      py::arg("x"), py::arg("y"), py::arg("sigma_px") = 3.0);

  m.def(
      "ec_distance",
      [](const std::vector<double>& fc, const std::vector<double>& gt) {
        if (fc.size() != 3 || gt.size() != 3)
          throw Error("ec_distance: fc and gt must be 3-vectors (mm)");
        data::Gaze3dRecord rec;
        for (int i = 0; i < 3; ++i) {
          rec.fc[i] = fc[i];
          rec.gt[i] = gt[i];
        }
        return data::ec_distance(rec);
      },
      py::arg("fc"), py::arg("gt"));

  m.def(
      "label_ec_mpii",
      [](const std::vector<double>& fc, const std::vector<double>& gt,
         double threshold_mm) {
        data::Gaze3dRecord rec;
        for (int i = 0; i < 3; ++i) {
          rec.fc[i] = fc[i];
          rec.gt[i] = gt[i];
        }
        return std::string(data::to_string(data::label_ec_mpii(rec, threshold_mm)));
      },
      py::arg("fc"), py::arg("gt"), py::arg("threshold_mm") = 30.0);

  m.def(
      "label_ec_columbia",
      [](double elevation_deg, double yaw_deg) {
        return std::string(
            data::to_string(data::label_ec_columbia(elevation_deg, yaw_deg)));
      },
      py::arg("elevation_deg"), py::arg("yaw_deg"));

  m.def(
      "sample_eyediap_frames",
      [](const std::vector<std::pair<std::string, int>>& index, int per_video) {
        std::vector<data::VideoIndexEntry> entries;
        for (const auto& [id, count] : index) entries.push_back({id, count});
        return data::sample_eyediap_frames(entries, per_video);
      },
      py::arg("index"), py::arg("per_video") = 50);

  m.def(
      "heatmap_auc",
      [](const py::array_t<double>& pred, double x, double y,
         const std::string& mode, double sigma_px) {
        return eval::heatmap_auc(heatmap_from_array(pred), {x, y},
                                 mode == "single" ? eval::AucPositives::kSingleCell
                                                  : eval::AucPositives::kGaussianDisk,
                                 sigma_px);
      },
      py::arg("pred"), py::arg("x"), py::arg("y"),
      py::arg("mode") = "gaussian", py::arg("sigma_px") = 3.0);

  m.def("average_precision", &eval::average_precision, py::arg("scored"),
        "AP over (score, is_positive) pairs, all-points interpolation");

  m.def(
      "ec_prf",
      [](const std::vector<bool>& preds, const std::vector<bool>& truths) {
        const auto r = eval::ec_prf(preds, truths);
        return py::make_tuple(r.precision, r.recall, r.f1);
      },
      py::arg("preds"), py::arg("truths"));

  m.def(
      "heatmap_loss",
      [](const py::array_t<double>& pred, const py::array_t<double>& gt,
         bool is_ift) {
        return train::heatmap_loss(heatmap_from_array(pred),
                                   heatmap_from_array(gt), is_ift);
      },
      py::arg("pred"), py::arg("gt"), py::arg("is_ift"));

  m.def("inout_loss", &train::inout_loss, py::arg("p_ift"), py::arg("label_in"));

  py::class_<PySystem>(m, "System",
                       "Full conditional-inference engine over numpy images")
      .def(py::init<uint64_t, double, int, int, int, int, const std::string&,
                    const std::string&>(),
           py::arg("seed") = 0, py::arg("sigma") = 0.85,
           py::arg("input_size") = 448, py::arg("patch_size") = 32,
           py::arg("embed_dim") = 64, py::arg("encoder_blocks") = 1,
           py::arg("ec_weights") = "", py::arg("gaze_weights") = "")
      .def("infer", &PySystem::infer, py::arg("image"), py::arg("boxes"),
           "One verdict dict per head box")
      .def("render", &PySystem::render, py::arg("image"), py::arg("boxes"))
      .def_property_readonly("gaze_invocations", &PySystem::gaze_invocations);

  m.attr("__version__") = "0.1.0";
}
