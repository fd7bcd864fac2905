// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gt360 {

Point argmax_point(const HeatmapGrid& hm) {
  const int n = HeatmapGrid::kSize;
  int best_r = 0, best_c = 0;
  double best = hm.at(0, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (hm.at(r, c) > best) {
        best = hm.at(r, c);
        best_r = r;
        best_c = c;
      }
  return {(best_c + 0.5) / n, (best_r + 0.5) / n};
}

Point centroid_point(const HeatmapGrid& hm) {
  const int n = HeatmapGrid::kSize;
  double total = 0.0, sx = 0.0, sy = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double v = hm.at(r, c);
      total += v;
      sx += v * (c + 0.5) / n;
      sy += v * (r + 0.5) / n;
    }
  if (total <= 0.0) return argmax_point(hm);
  return {sx / total, sy / total};
}

PixelRect padded_pixel_rect(const HeadBox& box, double pad, int frame_width,
                            int frame_height) {
  const double bw = box.width(), bh = box.height();
  const double x0 = box.x_min - pad * bw;
  const double x1 = box.x_max + pad * bw;
  const double y0 = box.y_min - pad * bh;
  const double y1 = box.y_max + pad * bh;
  // Half-open pixel rect [floor(x0*W), floor(x1*W)); a box thinner than one
  // pixel degenerates to zero area, which crop_head reports as unusable.
  PixelRect r;
  r.x0 = std::clamp(static_cast<int>(std::floor(x0 * frame_width)), 0, frame_width);
  r.x1 = std::clamp(static_cast<int>(std::floor(x1 * frame_width)), 0, frame_width);
  r.y0 = std::clamp(static_cast<int>(std::floor(y0 * frame_height)), 0, frame_height);
  r.y1 = std::clamp(static_cast<int>(std::floor(y1 * frame_height)), 0, frame_height);
  return r;
}

FrameImage crop_head(const FrameImage& img, const HeadBox& box, double pad) {
  box.validate("crop_head");
  if (pad < 0.0) throw Error("crop_head: pad must be >= 0");
  const PixelRect r = padded_pixel_rect(box, pad, img.width(), img.height());
  if (r.empty())
    throw Error("crop_head: box degenerates to zero pixel area after clamping");
  FrameImage out(r.width(), r.height());
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x - r.x0, y - r.y0, c) = img.at(x, y, c);
  return out;
}

}  // namespace gt360
