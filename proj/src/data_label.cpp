// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "gt360/data.hpp"

namespace gt360::data {

namespace {
double norm3(const double v[3]) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}
}  // namespace

double ec_distance(const Gaze3dRecord& rec) {
  double v[3] = {rec.gt[0] - rec.fc[0], rec.gt[1] - rec.fc[1],
                 rec.gt[2] - rec.fc[2]};
  const double vn = norm3(v);
  if (vn == 0.0) throw DataError("ec_distance: zero-length gaze vector");
  const double d[3] = {v[0] / vn, v[1] / vn, v[2] / vn};
  // Distance from the origin to the line fc + t*d: remove from fc its
  // component along d.
  const double proj = rec.fc[0] * d[0] + rec.fc[1] * d[1] + rec.fc[2] * d[2];
  const double perp[3] = {rec.fc[0] - proj * d[0], rec.fc[1] - proj * d[1],
                          rec.fc[2] - proj * d[2]};
  return norm3(perp);
}

double ec_distance_literal(const Gaze3dRecord& rec) {
  double v[3] = {rec.gt[0] - rec.fc[0], rec.gt[1] - rec.fc[1],
                 rec.gt[2] - rec.fc[2]};
  const double vn = norm3(v);
  if (vn == 0.0) throw DataError("ec_distance: zero-length gaze vector");
  const double d[3] = {v[0] / vn, v[1] / vn, v[2] / vn};
  const double proj = v[0] * d[0] + v[1] * d[1] + v[2] * d[2];
  const double res[3] = {v[0] - proj * d[0], v[1] - proj * d[1],
                         v[2] - proj * d[2]};
  return norm3(res);
}

Label label_ec_mpii(const Gaze3dRecord& rec, double threshold_mm) {
  const double dist = ec_distance(rec);
  // Gating: the ray must run toward the camera, not away from it; otherwise
  // "looking exactly away" would also score dist ~ 0.
  const double v[3] = {rec.gt[0] - rec.fc[0], rec.gt[1] - rec.fc[1],
                       rec.gt[2] - rec.fc[2]};
  const double toward = -(v[0] * rec.fc[0] + v[1] * rec.fc[1] + v[2] * rec.fc[2]);
  if (dist < threshold_mm && toward > 0.0) return Label::kEC;
  return Label::kOFT;
}

Label label_ec_columbia(double elevation_deg, double yaw_deg) {
  if (!std::isfinite(elevation_deg) || !std::isfinite(yaw_deg))
    throw DataError("label_ec_columbia: non-finite angle");
  return (elevation_deg == 0.0 && yaw_deg == 0.0) ? Label::kEC : Label::kOFT;
}

std::vector<std::pair<std::string, int>> sample_eyediap_frames(
    const std::vector<VideoIndexEntry>& index, int per_video) {
  if (per_video < 1) throw DataError("sample_eyediap_frames: per_video must be >= 1");
  for (const auto& v : index)
    if (v.frame_count < per_video)
      throw DataError("sample_eyediap_frames: video '" + v.video_id + "' has " +
                      std::to_string(v.frame_count) + " frames, need at least " +
                      std::to_string(per_video));
  std::vector<std::pair<std::string, int>> out;
  out.reserve(index.size() * static_cast<size_t>(per_video));
  for (const auto& v : index)
    for (int i = 0; i < per_video; ++i)
      out.emplace_back(v.video_id,
                       static_cast<int>(static_cast<int64_t>(i) *
                                        v.frame_count / per_video));
  return out;
}

}  // namespace gt360::data
