// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_TYPES_HPP
#define GT360_TYPES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gt360/common.hpp"

namespace gt360 {

// 2D point in normalized [0,1] coordinates relative to frame width/height.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Interleaved RGB image, 8 bits per channel, row-major.
class FrameImage {
 public:
  FrameImage() = default;
  FrameImage(int width, int height, uint8_t fill = 0)
      : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw Error("FrameImage: width and height must be >= 1");
    pixels_.assign(static_cast<size_t>(width) * height * 3, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const { return pixels_.size() / 3; }

  uint8_t* data() { return pixels_.data(); }
  const uint8_t* data() const { return pixels_.data(); }
  size_t byte_size() const { return pixels_.size(); }

  uint8_t& at(int x, int y, int c) {
    return pixels_[(static_cast<size_t>(y) * width_ + x) * 3 + c];
  }
  uint8_t at(int x, int y, int c) const {
    return pixels_[(static_cast<size_t>(y) * width_ + x) * 3 + c];
  }

  bool operator==(const FrameImage& o) const {
    return width_ == o.width_ && height_ == o.height_ && pixels_ == o.pixels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> pixels_;
};

// Head bounding box in normalized coordinates.
struct HeadBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double confidence = 1.0;

  bool valid() const {
    return 0.0 <= x_min && x_min < x_max && x_max <= 1.0 && 0.0 <= y_min &&
           y_min < y_max && y_max <= 1.0 && 0.0 <= confidence &&
           confidence <= 1.0;
  }
  void validate(const std::string& context = "HeadBox") const {
    if (!valid()) throw Error(context + ": invalid box coordinates");
  }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }
};

// Fixed 64x64 grid of gaze-target probabilities.
class HeatmapGrid {
 public:
  static constexpr int kSize = 64;

  HeatmapGrid() : values_(kSize * kSize, 0.0) {}
  explicit HeatmapGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() != kSize * kSize)
      throw ShapeError("HeatmapGrid: expected 64x64 values, got " +
                       std::to_string(values_.size()));
  }

  double at(int row, int col) const { return values_[row * kSize + col]; }
  double& at(int row, int col) { return values_[row * kSize + col]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool in_unit_range() const {
    for (double v : values_)
      if (v < 0.0 || v > 1.0) return false;
    return true;
  }

 private:
  std::vector<double> values_;
};

enum class GazeClass { kEyeContact, kOutOfFrame, kInFrame };

inline const char* to_string(GazeClass c) {
  switch (c) {
    case GazeClass::kEyeContact: return "EC";
    case GazeClass::kOutOfFrame: return "OFT";
    case GazeClass::kInFrame: return "IFT";
  }
  return "?";
}

// Per-head pipeline result. Heatmap and target point are populated only for
// in-frame verdicts; p_ift is absent when the gaze stage was skipped for an
// eye-contact head.
struct GazeVerdict {
  HeadBox head;
  GazeClass cls = GazeClass::kOutOfFrame;
  double p_ec = 0.0;
  std::optional<double> p_ift;
  std::optional<HeatmapGrid> heatmap;
  std::optional<Point> target_point;

  bool invariants_hold() const {
    const bool ift = cls == GazeClass::kInFrame;
    return heatmap.has_value() == ift && target_point.has_value() == ift;
  }
};

struct PipelineConfig {
  double sigma = 0.85;            // EC cut-off probability
  double ift_threshold = 0.5;     // in/out decision boundary
  int heatmap_size = 64;
  int input_width = 448;
  int input_height = 448;
  double crop_pad = 0.2;          // head crop padding, fraction of box size

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0))
      throw ConfigError("PipelineConfig: sigma must be in (0,1)");
    if (heatmap_size != HeatmapGrid::kSize)
      throw ConfigError("PipelineConfig: heatmap_size is fixed at 64");
    if (ift_threshold != 0.5)
      throw ConfigError("PipelineConfig: ift_threshold is fixed at 0.5");
    if (input_width < 1 || input_height < 1)
      throw ConfigError("PipelineConfig: input size must be positive");
    if (crop_pad < 0.0)
      throw ConfigError("PipelineConfig: crop_pad must be >= 0");
  }
};

}  // namespace gt360

#endif  // GT360_TYPES_HPP
