// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "gt360/data.hpp"
#include "gt360/image_ops.hpp"
#include "gt360/rng.hpp"

namespace gt360::data {

namespace {
uint8_t clamp_u8(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}
}  // namespace

Augmented augment(const FrameImage& img, const HeadBox& head,
                  const std::optional<Point>& target, uint64_t seed,
                  const AugmentConfig& cfg) {
  Rng rng(Rng::derive(seed, "augment"));
  const double fb = rng.uniform(1.0 - cfg.brightness, 1.0 + cfg.brightness);
  const double fc = rng.uniform(1.0 - cfg.contrast, 1.0 + cfg.contrast);
  const double fs = rng.uniform(1.0 - cfg.saturation, 1.0 + cfg.saturation);
  const bool to_gray = rng.uniform() < cfg.grayscale_prob;

  FrameImage out = img;
  const int w = out.width(), h = out.height();

  // Contrast pivots on the global mean luminance.
  double mean = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      mean += 0.299 * out.at(x, y, 0) + 0.587 * out.at(x, y, 1) +
              0.114 * out.at(x, y, 2);
  mean /= static_cast<double>(w) * h;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double rgb[3];
      for (int c = 0; c < 3; ++c) rgb[c] = out.at(x, y, c) * fb;
      for (int c = 0; c < 3; ++c) rgb[c] = mean + (rgb[c] - mean) * fc;
      const double gray = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
      if (to_gray) {
        rgb[0] = rgb[1] = rgb[2] = gray;
      } else {
        for (int c = 0; c < 3; ++c) rgb[c] = gray + (rgb[c] - gray) * fs;
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp_u8(rgb[c]);
    }

  Augmented result;
  result.image = resize_bilinear(out, cfg.out_width, cfg.out_height);
  result.head = head;
  result.target = target;
  return result;
}

}  // namespace gt360::data
