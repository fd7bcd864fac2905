// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_GEOMETRY_HPP
#define GT360_GEOMETRY_HPP

#include "gt360/types.hpp"

namespace gt360 {

// Center of the maximal cell mapped to [0,1]^2; ties break to the smallest
// row, then the smallest column.
Point argmax_point(const HeatmapGrid& hm);

// Probability-weighted centroid of cell centers. Falls back to argmax when
// the grid is all-zero.
Point centroid_point(const HeatmapGrid& hm);

// Pixel rectangle, half-open: [x0,x1) x [y0,y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return width() <= 0 || height() <= 0; }
};

// Box expanded by `pad` (fraction of box size per side), clamped to the
// frame, in pixel coordinates.
PixelRect padded_pixel_rect(const HeadBox& box, double pad, int frame_width,
                            int frame_height);

// Sub-image covered by the padded, clamped box. Throws Error when the box
// degenerates to zero pixel area.
FrameImage crop_head(const FrameImage& img, const HeadBox& box, double pad = 0.0);

}  // namespace gt360

#endif  // GT360_GEOMETRY_HPP
