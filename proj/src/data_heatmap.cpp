// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "gt360/data.hpp"

namespace gt360::data {

HeatmapGrid build_gt_heatmap(Point target, int size, double sigma_px) {
  if (size != HeatmapGrid::kSize)
    throw DataError("build_gt_heatmap: grid size is fixed at 64");
  if (sigma_px <= 0.0) throw DataError("build_gt_heatmap: sigma_px must be > 0");
  if (target.x < 0.0 || target.x > 1.0 || target.y < 0.0 || target.y > 1.0)
    throw DataError("build_gt_heatmap: target outside [0,1]^2");

  const int col = std::clamp(static_cast<int>(target.x * size), 0, size - 1);
  const int row = std::clamp(static_cast<int>(target.y * size), 0, size - 1);
  HeatmapGrid hm;
  const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const double dr = r - row, dc = c - col;
      hm.at(r, c) = std::exp(-(dr * dr + dc * dc) * inv2s2);
    }
  return hm;
}

}  // namespace gt360::data
