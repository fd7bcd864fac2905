// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "gt360/geometry.hpp"
#include "gt360/pipeline.hpp"

namespace gt360::pipeline {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kOutline{0, 200, 0};
constexpr Rgb kEcTint{0, 200, 0};
constexpr Rgb kOftTint{200, 0, 0};
constexpr Rgb kArrow{255, 255, 0};
constexpr Rgb kDot{0, 255, 0};  // pure green, unique in the palette

void put(FrameImage& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  img.at(x, y, 0) = c.r;
  img.at(x, y, 1) = c.g;
  img.at(x, y, 2) = c.b;
}

void blend(FrameImage& img, int x, int y, Rgb c, double alpha) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  const uint8_t src[3] = {c.r, c.g, c.b};
  for (int ch = 0; ch < 3; ++ch) {
    const double v = img.at(x, y, ch) * (1.0 - alpha) + src[ch] * alpha;
    img.at(x, y, ch) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
}

void draw_line(FrameImage& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_disc(FrameImage& img, int cx, int cy, int radius, Rgb c) {
  for (int y = cy - radius; y <= cy + radius; ++y)
    for (int x = cx - radius; x <= cx + radius; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
        put(img, x, y, c);
}

int to_px(double v, int n) {
  return std::clamp(static_cast<int>(v * n), 0, n - 1);
}

void draw_box(FrameImage& img, const PixelRect& r, Rgb c) {
  for (int x = r.x0; x < r.x1; ++x) {
    put(img, x, r.y0, c);
    put(img, x, r.y1 - 1, c);
  }
  for (int y = r.y0; y < r.y1; ++y) {
    put(img, r.x0, y, c);
    put(img, r.x1 - 1, y, c);
  }
}

void tint_box(FrameImage& img, const PixelRect& r, Rgb c, double alpha) {
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) blend(img, x, y, c, alpha);
}

void overlay_heatmap(FrameImage& img, const HeatmapGrid& hm) {
  const int w = img.width(), h = img.height(), n = HeatmapGrid::kSize;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int r = std::min(n - 1, y * n / h);
      const int c = std::min(n - 1, x * n / w);
      const double v = hm.at(r, c);
      if (v < 0.05) continue;
      blend(img, x, y,
            Rgb{255, static_cast<uint8_t>(std::lround(128 * v)), 0}, 0.5 * v);
    }
}

}  // namespace

FrameImage render_overlay(const FrameImage& img,
                          const std::vector<GazeVerdict>& verdicts) {
  FrameImage out = img;
  const int w = out.width(), h = out.height();
  for (const auto& v : verdicts) {
    const PixelRect box = padded_pixel_rect(v.head, 0.0, w, h);
    if (box.empty()) continue;
    switch (v.cls) {
      case GazeClass::kEyeContact:
        tint_box(out, box, kEcTint, 0.3);
        draw_box(out, box, kOutline);
        break;
      case GazeClass::kOutOfFrame:
        tint_box(out, box, kOftTint, 0.3);
        draw_box(out, box, kOutline);
        break;
      case GazeClass::kInFrame: {
        if (v.heatmap) overlay_heatmap(out, *v.heatmap);
        draw_box(out, box, kOutline);
        if (v.target_point) {
          const Point ctr = v.head.center();
          const int x0 = to_px(ctr.x, w), y0 = to_px(ctr.y, h);
          const int x1 = to_px(v.target_point->x, w);
          const int y1 = to_px(v.target_point->y, h);
          draw_line(out, x0, y0, x1, y1, kArrow);
          // Arrowhead: two short strokes back from the tip.
          const double ang = std::atan2(static_cast<double>(y1 - y0),
                                        static_cast<double>(x1 - x0));
          for (const double da : {2.6, -2.6}) {
            const int ax = x1 + static_cast<int>(std::lround(7 * std::cos(ang + da)));
            const int ay = y1 + static_cast<int>(std::lround(7 * std::sin(ang + da)));
            draw_line(out, x1, y1, ax, ay, kArrow);
          }
          draw_disc(out, x1, y1, 3, kDot);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace gt360::pipeline
