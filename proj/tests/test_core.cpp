// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "gt360/geometry.hpp"
#include "gt360/rng.hpp"
#include "testutil.hpp"

using namespace gt360;

namespace {
// Independent argmax scan used as the oracle: enumerate all 4096 cells.
std::pair<int, int> scan_argmax(const HeatmapGrid& hm) {
  int br = 0, bc = 0;
  double best = -1.0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c)
      if (hm.at(r, c) > best) {
        best = hm.at(r, c);
        br = r;
        bc = c;
      }
  return {br, bc};
}
}  // namespace

TEST_CASE("argmax_point single nonzero cell") {
  HeatmapGrid hm;
  hm.at(0, 0) = 1.0;
  const Point p = argmax_point(hm);
  CHECK(p.x == doctest::Approx(0.0078125));
  CHECK(p.y == doctest::Approx(0.0078125));
}

TEST_CASE("argmax_point tie-breaks to row 0, col 0 on a uniform grid") {
  HeatmapGrid hm;
  for (auto& v : hm.values()) v = 0.37;
  const Point p = argmax_point(hm);
  CHECK(p.x == doctest::Approx(0.0078125));
  CHECK(p.y == doctest::Approx(0.0078125));
}

TEST_CASE("argmax_point matches full-scan oracle at (32,16)") {
  HeatmapGrid hm;
  Rng rng(7);
  for (auto& v : hm.values()) v = rng.uniform() * 0.5;
  hm.at(32, 16) = 0.9;  // unique max
  const auto [r, c] = scan_argmax(hm);
  CHECK(r == 32);
  CHECK(c == 16);
  const Point p = argmax_point(hm);
  CHECK(p.x == doctest::Approx((16 + 0.5) / 64.0));  // 0.2578125
  CHECK(p.y == doctest::Approx((32 + 0.5) / 64.0));  // 0.5078125
  CHECK(p.x == doctest::Approx(0.2578125));
  CHECK(p.y == doctest::Approx(0.5078125));
}

TEST_CASE("argmax_point invariant under positive scaling") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    HeatmapGrid hm;
    for (auto& v : hm.values()) v = rng.uniform();
    const Point base = argmax_point(hm);
    const double c = rng.uniform(0.01, 10.0);
    HeatmapGrid scaled = hm;
    for (auto& v : scaled.values()) v *= c;
    const Point p = argmax_point(scaled);
    CHECK(p.x == base.x);
    CHECK(p.y == base.y);
  }
}

TEST_CASE("centroid_point of symmetric mass is the center") {
  HeatmapGrid hm;
  hm.at(31, 31) = 1.0;
  hm.at(32, 32) = 1.0;
  const Point p = centroid_point(hm);
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.y == doctest::Approx(0.5));
}

TEST_CASE("crop_head full-frame box is the identity") {
  const FrameImage img = testutil::noise_image(37, 23, 5);
  const FrameImage crop = crop_head(img, {0, 0, 1, 1, 1.0}, 0.0);
  CHECK(crop == img);
}

TEST_CASE("crop_head quarter box on 100x100 yields 50x50") {
  const FrameImage img = testutil::noise_image(100, 100, 6);
  const FrameImage crop = crop_head(img, {0.25, 0.25, 0.75, 0.75, 1.0}, 0.0);
  CHECK(crop.width() == 50);
  CHECK(crop.height() == 50);
  CHECK(crop.at(0, 0, 0) == img.at(25, 25, 0));
  CHECK(crop.at(49, 49, 2) == img.at(74, 74, 2));
}

TEST_CASE("crop_head clamps padded corner box to the frame") {
  const FrameImage img = testutil::noise_image(100, 100, 8);
  // Box (0.9,0.9,1.0,1.0), pad 0.5 of the 0.1 size -> (0.85,...,1.05),
  // clamped to (0.85,...,1.0): pixels [85,100) on both axes.
  const FrameImage crop = crop_head(img, {0.9, 0.9, 1.0, 1.0, 1.0}, 0.5);
  CHECK(crop.width() == 15);
  CHECK(crop.height() == 15);
  CHECK(crop.at(0, 0, 1) == img.at(85, 85, 1));
  CHECK(crop.at(14, 14, 1) == img.at(99, 99, 1));
}

TEST_CASE("crop_head error on degenerate pixel area") {
  const FrameImage img = testutil::noise_image(4, 4, 9);
  // A box thinner than one pixel, entirely inside pixel column 2.
  HeadBox b{0.51, 0.2, 0.52, 0.8, 1.0};
  CHECK_THROWS_AS(crop_head(img, b, 0.0), Error);
}

TEST_CASE("crop_head never reads out of bounds for random boxes") {
  Rng rng(13);
  const FrameImage img = testutil::noise_image(64, 48, 10);
  int successes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double x0 = rng.uniform(0.0, 0.95);
    const double y0 = rng.uniform(0.0, 0.95);
    HeadBox b{x0, y0, rng.uniform(x0 + 0.01, 1.0), rng.uniform(y0 + 0.01, 1.0), 1.0};
    const double pad = rng.uniform(0.0, 1.5);
    try {
      const FrameImage crop = crop_head(img, b, pad);
      CHECK(crop.width() <= img.width());
      CHECK(crop.height() <= img.height());
      ++successes;
    } catch (const Error&) {
      // degenerate after clamping: acceptable outcome, never a crash
    }
  }
  CHECK(successes > 150);
}

TEST_CASE("padded_pixel_rect is monotone in pad") {
  const HeadBox b{0.3, 0.3, 0.5, 0.5, 1.0};
  const PixelRect r0 = padded_pixel_rect(b, 0.0, 200, 200);
  const PixelRect r1 = padded_pixel_rect(b, 0.5, 200, 200);
  CHECK(r1.x0 <= r0.x0);
  CHECK(r1.y0 <= r0.y0);
  CHECK(r1.x1 >= r0.x1);
  CHECK(r1.y1 >= r0.y1);
}

TEST_CASE("HeadBox and PipelineConfig invariants") {
  CHECK(HeadBox{0, 0, 1, 1, 1}.valid());
  CHECK_FALSE(HeadBox{0.5, 0, 0.5, 1, 1}.valid());
  CHECK_FALSE(HeadBox{-0.1, 0, 0.5, 1, 1}.valid());

  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sigma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  CHECK_THROWS_AS(FrameImage(0, 5), Error);
  CHECK_THROWS_AS(HeatmapGrid(std::vector<double>(100, 0.0)), ShapeError);
}

TEST_CASE("GazeVerdict invariants tie heatmap and target to IFT") {
  GazeVerdict v;
  v.cls = GazeClass::kOutOfFrame;
  CHECK(v.invariants_hold());
  v.heatmap = HeatmapGrid{};
  CHECK_FALSE(v.invariants_hold());
  v.cls = GazeClass::kInFrame;
  v.target_point = Point{0.5, 0.5};
  CHECK(v.invariants_hold());
}
