// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "gt360/geometry.hpp"
#include "gt360/pipeline.hpp"
#include "testutil.hpp"

using namespace gt360;
using pipeline::Gt360System;
using pipeline::SystemConfig;

namespace {

SystemConfig tiny_system(std::vector<detect::RawDetection> boxes) {
  SystemConfig cfg;
  cfg.pipeline.input_width = 64;
  cfg.pipeline.input_height = 64;
  cfg.detector_backend = "scripted";
  cfg.detector_options.scripted_boxes = std::move(boxes);
  cfg.ec_config.input_size = 32;
  cfg.ec_config.c1 = 4;
  cfg.ec_config.c2 = 4;
  cfg.ec_config.c3 = 4;
  cfg.encoder_config.input_size = 64;
  cfg.encoder_config.patch_size = 16;
  cfg.encoder_config.embed_dim = 16;
  cfg.encoder_config.blocks = 0;
  cfg.decoder_config.token_grid = 4;
  cfg.decoder_config.encoder_dim = 16;
  cfg.decoder_config.msf.fusion_channels = 16;
  cfg.decoder_config.heads = 2;
  cfg.decoder_config.mlp_ratio = 2;
  cfg.decoder_config.inout_hidden = 8;
  cfg.decoder_config.hm_c1 = 4;
  cfg.decoder_config.hm_c2 = 4;
  return cfg;
}

// Independent restatement of the three-way rule for cross-checking.
GazeClass three_way_rule(double p_ec, double p_ift, double sigma) {
  const bool ec = p_ec >= sigma;
  const bool in_frame = p_ift >= 0.5;
  if (ec) return GazeClass::kEyeContact;
  return in_frame ? GazeClass::kInFrame : GazeClass::kOutOfFrame;
}

}  // namespace

TEST_CASE("classify: three-way rule with boundary semantics") {
  PipelineConfig cfg;  // sigma 0.85
  CHECK(pipeline::classify(0.9, 0.0, cfg) == GazeClass::kEyeContact);
  CHECK(pipeline::classify(0.9, 1.0, cfg) == GazeClass::kEyeContact);
  CHECK(pipeline::classify(0.5, 0.3, cfg) == GazeClass::kOutOfFrame);
  CHECK(pipeline::classify(0.84999, 0.5, cfg) == GazeClass::kInFrame);
  CHECK(pipeline::classify(0.85, 0.5, cfg) == GazeClass::kEyeContact);  // >= wins
  CHECK(pipeline::classify(0.84999, 0.49999, cfg) == GazeClass::kOutOfFrame);
}

TEST_CASE("classify matches the independent rule over a boundary grid") {
  PipelineConfig cfg;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const double p_ec = i / 200.0, p_ift = j / 200.0;
      CHECK(pipeline::classify(p_ec, p_ift, cfg) ==
            three_way_rule(p_ec, p_ift, cfg.sigma));
    }
}

TEST_CASE("infer_frame: zero detections yields an empty verdict list") {
  const Gt360System sys = Gt360System::create(tiny_system({}));
  const auto verdicts = sys.infer_frame(testutil::noise_image(64, 64, 1));
  CHECK(verdicts.empty());
  CHECK(sys.gaze_invocations() == 0);
}

TEST_CASE("conditional skip: gaze decoder runs only for non-EC heads") {
  const std::vector<detect::RawDetection> boxes = {
      {0.05, 0.05, 0.45, 0.45, 0.9}, {0.55, 0.55, 0.95, 0.95, 0.8}};
  // Distinct crops so the two EC probabilities differ.
  FrameImage img = testutil::noise_image(100, 100, 2, 30);
  testutil::draw_disc(img, 0.25, 0.25, 12);

  // Probe the EC probabilities with a never-EC threshold first.
  SystemConfig probe_cfg = tiny_system(boxes);
  probe_cfg.pipeline.sigma = 0.999999;
  const Gt360System probe = Gt360System::create(probe_cfg);
  const auto probed = probe.infer_frame(img);
  REQUIRE(probed.size() == 2);
  const double p0 = probed[0].value().p_ec;
  const double p1 = probed[1].value().p_ec;
  REQUIRE(p0 != p1);
  CHECK(probe.gaze_invocations() == 2);  // neither head was EC

  SUBCASE("sigma below both: every head EC, zero gaze invocations") {
    SystemConfig cfg = tiny_system(boxes);
    cfg.pipeline.sigma = std::min(p0, p1) * 0.99;
    const Gt360System sys = Gt360System::create(cfg);
    const auto verdicts = sys.infer_frame(img);
    for (const auto& v : verdicts) {
      CHECK(v.value().cls == GazeClass::kEyeContact);
      CHECK_FALSE(v.value().p_ift.has_value());
      CHECK(v.value().invariants_hold());
    }
    CHECK(sys.gaze_invocations() == 0);
  }

  SUBCASE("sigma between the two: exactly one gaze invocation") {
    SystemConfig cfg = tiny_system(boxes);
    cfg.pipeline.sigma = (p0 + p1) / 2.0;
    const Gt360System sys = Gt360System::create(cfg);
    const auto verdicts = sys.infer_frame(img);
    REQUIRE(verdicts.size() == 2);
    CHECK(sys.gaze_invocations() == 1);
    size_t ec_count = 0;
    for (const auto& v : verdicts)
      if (v.value().cls == GazeClass::kEyeContact) ++ec_count;
    CHECK(ec_count == 1);
  }
}

TEST_CASE("infer_frame is deterministic and keeps verdict invariants") {
  const std::vector<detect::RawDetection> boxes = {{0.1, 0.1, 0.6, 0.6, 1.0}};
  const FrameImage img = testutil::noise_image(64, 64, 3);
  const Gt360System sys = Gt360System::create(tiny_system(boxes));

  const auto a = sys.infer_frame(img);
  const auto b = sys.infer_frame(img);
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(a[0].value().p_ec == b[0].value().p_ec);
  CHECK(a[0].value().cls == b[0].value().cls);
  CHECK(a[0].value().invariants_hold());
  if (a[0].value().p_ift) CHECK(*a[0].value().p_ift == *b[0].value().p_ift);
  if (a[0].value().cls == GazeClass::kInFrame) {
    CHECK(a[0].value().heatmap->values() == b[0].value().heatmap->values());
  }
}

TEST_CASE("per-head failures do not abort the frame") {
  // Second box clamps to a sub-pixel sliver: its crop fails, others survive.
  const std::vector<detect::RawDetection> boxes = {
      {0.1, 0.1, 0.6, 0.6, 0.9}, {0.9999999, 0.2, 1.0, 0.2000001, 0.8}};
  const FrameImage img = testutil::noise_image(64, 64, 4);
  const Gt360System sys = Gt360System::create(tiny_system(boxes));
  const auto verdicts = sys.infer_frame(img);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].has_value());
  CHECK_FALSE(verdicts[1].has_value());
  CHECK_FALSE(verdicts[1].error().empty());
}

TEST_CASE("render_overlay: empty verdicts is the identity") {
  const FrameImage img = testutil::noise_image(50, 40, 5);
  CHECK(pipeline::render_overlay(img, {}) == img);
}

TEST_CASE("render_overlay: EC verdict touches only the head box region") {
  const FrameImage img = testutil::noise_image(80, 60, 6);
  GazeVerdict v;
  v.head = {0.25, 0.25, 0.75, 0.75, 1.0};
  v.cls = GazeClass::kEyeContact;
  v.p_ec = 0.95;
  const FrameImage out = pipeline::render_overlay(img, {v});
  CHECK_FALSE(out == img);

  const PixelRect box = padded_pixel_rect(v.head, 0.0, img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const bool inside =
          x >= box.x0 && x < box.x1 && y >= box.y0 && y < box.y1;
      if (inside) continue;
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == img.at(x, y, c));
    }
}

TEST_CASE("render_overlay: IFT dot lands on the target within one pixel") {
  const FrameImage img = testutil::noise_image(101, 101, 7, 30);
  GazeVerdict v;
  v.head = {0.05, 0.05, 0.25, 0.25, 1.0};
  v.cls = GazeClass::kInFrame;
  v.p_ec = 0.1;
  v.p_ift = 0.9;
  v.heatmap = HeatmapGrid{};  // empty heatmap keeps the dot unoccluded
  v.target_point = Point{0.5, 0.5};
  const FrameImage out = pipeline::render_overlay(img, {v});

  // Locate the pure-green dot.
  double sx = 0, sy = 0, n = 0;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (out.at(x, y, 0) == 0 && out.at(x, y, 1) == 255 && out.at(x, y, 2) == 0) {
        sx += x;
        sy += y;
        ++n;
      }
  REQUIRE(n > 0);
  CHECK(std::abs(sx / n - 50.0) <= 1.0);
  CHECK(std::abs(sy / n - 50.0) <= 1.0);
}
