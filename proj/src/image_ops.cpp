// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace gt360 {

FrameImage resize_bilinear(const FrameImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1)
    throw Error("resize_bilinear: output size must be positive");
  if (out_width == img.width() && out_height == img.height()) return img;
  FrameImage out(out_width, out_height);
  const int w = img.width(), h = img.height();
  for (int oy = 0; oy < out_height; ++oy) {
    double sy = (oy + 0.5) * h / out_height - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = sy - y0;
    for (int ox = 0; ox < out_width; ++ox) {
      double sx = (ox + 0.5) * w / out_width - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
        const double v = top * (1 - wy) + bot * wy;
        out.at(ox, oy, c) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

nn::Tensor image_to_tensor(const FrameImage& img) {
  nn::Tensor t({img.height(), img.width(), 3});
  const uint8_t* src = img.data();
  double* dst = t.data();
  const size_t n = img.byte_size();
  for (size_t i = 0; i < n; ++i) dst[i] = src[i] / 127.5 - 1.0;
  return t;
}

}  // namespace gt360
