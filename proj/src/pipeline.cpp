// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/pipeline.hpp"

#include <optional>

#include "gt360/geometry.hpp"
#include "gt360/image_ops.hpp"

namespace gt360::pipeline {

GazeClass classify(double p_ec, double p_ift, const PipelineConfig& cfg) {
  if (p_ec >= cfg.sigma) return GazeClass::kEyeContact;
  if (p_ift < cfg.ift_threshold) return GazeClass::kOutOfFrame;
  return GazeClass::kInFrame;
}

Gt360System::Gt360System(PipelineConfig cfg, detect::DetectorHandle det,
                         ec::EcModel ec, gazenet::GazeModel gaze)
    : cfg_(cfg),
      detector_(std::move(det)),
      ec_(std::move(ec)),
      gaze_(std::move(gaze)),
      gaze_invocations_(std::make_shared<std::atomic<uint64_t>>(0)) {}

Gt360System Gt360System::create(const SystemConfig& cfg) {
  cfg.pipeline.validate();
  detect::DetectorHandle det =
      detect::DetectorHandle::create(cfg.detector_backend, cfg.detector_options);
  ec::EcModel ec = cfg.ec_weights.empty() ? ec::EcModel(cfg.ec_config)
                                          : ec::EcModel::load(cfg.ec_weights);
  gazenet::GazeModel gaze =
      cfg.gaze_weights.empty()
          ? gazenet::GazeModel(cfg.encoder_config, cfg.decoder_config)
          : gazenet::GazeModel::load(cfg.gaze_weights);
  if (gaze.encoder.config().input_size != cfg.pipeline.input_width ||
      gaze.encoder.config().input_size != cfg.pipeline.input_height)
    throw ConfigError("Gt360System: pipeline input size " +
                      std::to_string(cfg.pipeline.input_width) + "x" +
                      std::to_string(cfg.pipeline.input_height) +
                      " does not match encoder input " +
                      std::to_string(gaze.encoder.config().input_size));
  return Gt360System(cfg.pipeline, std::move(det), std::move(ec), std::move(gaze));
}

std::vector<Result<GazeVerdict>> Gt360System::infer_frame(
    const FrameImage& img, const std::string& image_ref) const {
  return infer_boxes(img, detector_.detect_heads(img, image_ref));
}

std::vector<Result<GazeVerdict>> Gt360System::infer_boxes(
    const FrameImage& img, const std::vector<HeadBox>& boxes) const {
  std::vector<Result<GazeVerdict>> out;
  out.reserve(boxes.size());

  // The scene encoding is head-independent; computed at most once per frame
  // and only when some head reaches the gaze stage.
  std::optional<nn::Tensor> features;

  for (const auto& box : boxes) {
    try {
      GazeVerdict v;
      v.head = box;
      v.p_ec = ec_.predict(img, box);
      if (v.p_ec >= cfg_.sigma) {
        v.cls = GazeClass::kEyeContact;  // gaze stage skipped entirely
        out.push_back(Result<GazeVerdict>::ok(std::move(v)));
        continue;
      }
      if (!features) {
        const FrameImage sized =
            resize_bilinear(img, cfg_.input_width, cfg_.input_height);
        features = gaze_.encoder.encode(sized);
      }
      gaze_invocations_->fetch_add(1);
      auto [p_ift, heatmap] = gaze_.decoder.decode(*features, box);
      v.p_ift = p_ift;
      v.cls = classify(v.p_ec, p_ift, cfg_);
      if (v.cls == GazeClass::kInFrame) {
        v.target_point = argmax_point(heatmap);
        v.heatmap = std::move(heatmap);
      }
      out.push_back(Result<GazeVerdict>::ok(std::move(v)));
    } catch (const Error& e) {
      out.push_back(Result<GazeVerdict>::err(e.what()));
    }
  }
  return out;
}

}  // namespace gt360::pipeline
