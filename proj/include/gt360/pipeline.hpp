// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_PIPELINE_HPP
#define GT360_PIPELINE_HPP

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "gt360/detect.hpp"
#include "gt360/eyecontact.hpp"
#include "gt360/gazenet.hpp"
#include "gt360/types.hpp"

namespace gt360::pipeline {

// Three-way conditional classification. Total and mutually exclusive over
// [0,1]^2: EC wins at p_ec >= sigma; otherwise the in/out probability
// decides at 0.5.
GazeClass classify(double p_ec, double p_ift, const PipelineConfig& cfg);

struct SystemConfig {
  PipelineConfig pipeline;
  std::string detector_backend = "scripted";
  detect::DetectorOptions detector_options;
  std::string ec_weights;    // checkpoint path; empty -> seeded stand-in
  std::string gaze_weights;  // checkpoint path; empty -> seeded init
  ec::EcConfig ec_config;
  gazenet::EncoderConfig encoder_config;
  gazenet::DecoderConfig decoder_config;
};

// The full conditional-inference engine: detector -> eye-contact stage ->
// (only for non-eye-contact heads) gaze encoder/decoder. Immutable after
// create(); concurrent inference calls are safe.
class Gt360System {
 public:
  static Gt360System create(const SystemConfig& cfg);

  // One verdict (or per-head error) per detected head, in detector order.
  // Frame-level detection failures throw.
  std::vector<Result<GazeVerdict>> infer_frame(const FrameImage& img,
                                               const std::string& image_ref = "") const;

  // Same contract with caller-supplied head boxes.
  std::vector<Result<GazeVerdict>> infer_boxes(
      const FrameImage& img, const std::vector<HeadBox>& boxes) const;

  // Number of gaze-decoder invocations since construction / reset; the
  // conditional-skip contract is observable through this counter.
  uint64_t gaze_invocations() const { return gaze_invocations_->load(); }
  void reset_gaze_invocations() { gaze_invocations_->store(0); }

  const PipelineConfig& config() const { return cfg_; }
  const ec::EcModel& ec_model() const { return ec_; }
  const gazenet::GazeModel& gaze_model() const { return gaze_; }
  const detect::DetectorHandle& detector() const { return detector_; }

 private:
  Gt360System(PipelineConfig cfg, detect::DetectorHandle det, ec::EcModel ec,
              gazenet::GazeModel gaze);

  PipelineConfig cfg_;
  detect::DetectorHandle detector_;
  ec::EcModel ec_;
  gazenet::GazeModel gaze_;
  std::shared_ptr<std::atomic<uint64_t>> gaze_invocations_;
};

// Overlay rendering: green box outlines for every head; green interior tint
// for EC, red for OFT; for IFT an arrow from the head centre to the target,
// a pure-green dot at the target, and an alpha-blended heatmap.
FrameImage render_overlay(const FrameImage& img,
                          const std::vector<GazeVerdict>& verdicts);

}  // namespace gt360::pipeline

#endif  // GT360_PIPELINE_HPP
