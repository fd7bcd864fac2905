// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_DETECT_HPP
#define GT360_DETECT_HPP

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gt360/types.hpp"

namespace gt360::detect {

// Raw backend output; may be unclamped or out of range. The frontend is the
// layer that enforces HeadBox invariants.
struct RawDetection {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double confidence = 1.0;
};

class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<RawDetection> detect(const FrameImage& img,
                                           const std::string& image_ref) = 0;
  virtual std::string name() const = 0;
  virtual bool reentrant() const { return false; }
};

struct DetectorOptions {
  double min_confidence = 0.0;
  // "stub": replays detections from a JSONL sidecar (manifest schema; an
  // optional "confidence" field is honored). Records are matched to the
  // queried frame by their "image" field.
  std::string stub_manifest;
  // "scripted": fixed in-memory boxes, returned for every frame.
  std::vector<RawDetection> scripted_boxes;
  // "external": command template run per frame; "{input}" is replaced by the
  // path of a temporary PPM dump of the frame. Must print a JSON array of
  // {"box":[x0,y0,x1,y1],"confidence":c} objects on stdout.
  std::string external_command;
};

// Frontend over a registered backend. Normalizes raw detections (clamps to
// [0,1], drops degenerate and low-confidence boxes) and orders the result by
// descending confidence. Thread-safe regardless of the backend: calls into a
// non-reentrant backend are serialized internally.
class DetectorHandle {
 public:
  // Registered backends: "stub", "scripted", "external".
  // Unknown names are rejected here, at construction.
  static DetectorHandle create(const std::string& backend_name,
                               const DetectorOptions& opts = {});

  // Empty result means "no faces found" and is a success; backend failures
  // throw DetectorError.
  std::vector<HeadBox> detect_heads(const FrameImage& img,
                                    const std::string& image_ref = "") const;

  const std::string& backend_name() const { return backend_name_; }
  double min_confidence() const { return min_confidence_; }

 private:
  DetectorHandle(std::string name, std::shared_ptr<DetectorBackend> backend,
                 double min_confidence);

  std::string backend_name_;
  std::shared_ptr<DetectorBackend> backend_;
  double min_confidence_;
  std::shared_ptr<std::mutex> mu_;  // used when the backend is not reentrant
};

}  // namespace gt360::detect

#endif  // GT360_DETECT_HPP
