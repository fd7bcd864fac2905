// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_DATA_HPP
#define GT360_DATA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gt360/types.hpp"

namespace gt360::data {

enum class Label { kEC, kOFT, kIFT, kUnknown };

const char* to_string(Label l);
Label label_from_string(const std::string& s);

// Unified training/eval record. JSONL schema, one object per line:
//   {"image": str, "box": [x0,y0,x1,y1], "label": "EC"|"OFT"|"IFT"|"UNKNOWN",
//    "target": [x,y] | null, "source": str, "confidence": number (optional)}
struct AnnotatedSample {
  std::string image_ref;
  HeadBox head;
  Label label = Label::kUnknown;
  std::optional<Point> target;
  std::string source;

  // IFT requires an in-range target; EC/OFT forbid one.
  void validate() const;
  std::string to_jsonl() const;
};

struct LoadReport {
  std::vector<AnnotatedSample> samples;
  std::map<std::string, size_t> per_source;
  struct Reject {
    size_t line;
    std::string reason;
  };
  std::vector<Reject> rejects;
};

// Parses and validates a JSONL manifest. Invalid lines are collected in the
// report with their line numbers rather than aborting the load. When
// check_images is set, image paths are resolved relative to the manifest
// directory and missing files reject the line.
LoadReport load_unified(const std::string& manifest_path,
                        bool check_images = false);

void save_manifest(const std::vector<AnnotatedSample>& samples,
                   const std::string& path);

// ------------------------------------------------------- geometric EC labels

// 3-D record in camera coordinates, millimeters.
struct Gaze3dRecord {
  double fc[3] = {0, 0, 0};  // face centre
  double gt[3] = {0, 0, 0};  // gaze target
};

// Perpendicular distance (mm) from the camera origin to the infinite line
// through the face centre with direction gt - fc. Throws DataError on a
// zero-length gaze vector.
double ec_distance(const Gaze3dRecord& rec);

// The projection-residual expression ||v - (v.d)d|| with v = gt - fc and
// d = v/||v||. Identically zero for every record since d is parallel to v;
// kept alongside the ray distance so the degeneracy stays documented in the
// test suite.
double ec_distance_literal(const Gaze3dRecord& rec);

// EC iff the gaze ray passes within threshold_mm of the camera origin
// (strict <) AND the gaze direction points toward the camera half-space.
Label label_ec_mpii(const Gaze3dRecord& rec, double threshold_mm = 30.0);

// EC iff both discrete head angles are exactly zero.
Label label_ec_columbia(double elevation_deg, double yaw_deg);

// --------------------------------------------------------- EYEDIAP sampling

struct VideoIndexEntry {
  std::string video_id;
  int frame_count = 0;
};

// Evenly spaced frames per video: frame_i = floor(i*frame_count/per_video).
// Throws DataError naming any video with fewer frames than per_video.
std::vector<std::pair<std::string, int>> sample_eyediap_frames(
    const std::vector<VideoIndexEntry>& index, int per_video = 50);

// ------------------------------------------------------ ground-truth heatmap

// Peak-1 isotropic Gaussian of std sigma_px (grid cells) centred at the cell
// containing the target.
HeatmapGrid build_gt_heatmap(Point target, int size = 64, double sigma_px = 3.0);

// --------------------------------------------------------------- augmentation

struct AugmentConfig {
  double brightness = 0.3;   // factor sampled from [1-b, 1+b]
  double contrast = 0.3;
  double saturation = 0.3;
  double grayscale_prob = 0.2;
  int out_width = 448;
  int out_height = 448;
};

struct Augmented {
  FrameImage image;
  HeadBox head;                  // unchanged: photometric-only pipeline
  std::optional<Point> target;   // unchanged
};

// Photometric jitter + optional grayscale, then resize. Deterministic under
// a fixed seed; geometry is never altered.
Augmented augment(const FrameImage& img, const HeadBox& head,
                  const std::optional<Point>& target, uint64_t seed,
                  const AugmentConfig& cfg = {});

// ------------------------------------------------------------- converters

struct ConvertStats {
  size_t total = 0;
  std::map<std::string, size_t> per_label;
  double oft_fraction = 0.0;
};

// Converters read the per-source CSV layouts documented in the README and
// emit the unified manifest schema.
ConvertStats convert_dataset(const std::string& source, const std::string& in_dir,
                             const std::string& out_manifest);

}  // namespace gt360::data

#endif  // GT360_DATA_HPP
