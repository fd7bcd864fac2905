// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/detect.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "gt360/image_codec.hpp"
#include "json.hpp"

namespace gt360::detect {

using nlohmann::json;

namespace {

// Matches a manifest record to a query either by full path or by filename.
bool image_matches(const std::string& record_image, const std::string& query) {
  if (record_image == query) return true;
  namespace fs = std::filesystem;
  return !query.empty() &&
         fs::path(record_image).filename() == fs::path(query).filename();
}

class StubBackend : public DetectorBackend {
 public:
  explicit StubBackend(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
      throw DetectorError("stub detector: cannot open sidecar manifest: " +
                          manifest_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw DetectorError("stub detector: bad JSON at line " +
                            std::to_string(line_no) + ": " + e.what());
      }
      Record r;
      r.image = j.value("image", "");
      const auto& box = j.at("box");
      r.det = {box.at(0).get<double>(), box.at(1).get<double>(),
               box.at(2).get<double>(), box.at(3).get<double>(),
               j.value("confidence", 1.0)};
      records_.push_back(std::move(r));
    }
  }

  std::vector<RawDetection> detect(const FrameImage&,
                                   const std::string& image_ref) override {
    std::vector<RawDetection> out;
    for (const auto& r : records_)
      if (image_ref.empty() || image_matches(r.image, image_ref))
        out.push_back(r.det);
    return out;
  }

  std::string name() const override { return "stub"; }
  bool reentrant() const override { return true; }

 private:
  struct Record {
    std::string image;
    RawDetection det;
  };
  std::vector<Record> records_;
};

class ScriptedBackend : public DetectorBackend {
 public:
  explicit ScriptedBackend(std::vector<RawDetection> boxes)
      : boxes_(std::move(boxes)) {}
  std::vector<RawDetection> detect(const FrameImage&, const std::string&) override {
    return boxes_;
  }
  std::string name() const override { return "scripted"; }
  bool reentrant() const override { return true; }

 private:
  std::vector<RawDetection> boxes_;
};

class ExternalBackend : public DetectorBackend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {
    if (command_.empty())
      throw DetectorError("external detector: no command configured");
  }

  std::vector<RawDetection> detect(const FrameImage& img,
                                   const std::string&) override {
    namespace fs = std::filesystem;
    static std::atomic<uint64_t> counter{0};
    const fs::path tmp =
        fs::temp_directory_path() /
        ("gt360_detect_" + std::to_string(::getpid()) + "_" +
         std::to_string(counter.fetch_add(1)) + ".ppm");
    io::save_ppm(img, tmp.string());
    std::string cmd = command_;
    const std::string placeholder = "{input}";
    const size_t pos = cmd.find(placeholder);
    if (pos == std::string::npos)
      throw DetectorError("external detector: command lacks {input} placeholder");
    cmd.replace(pos, placeholder.size(), tmp.string());

    std::string output;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
      fs::remove(tmp);
      throw DetectorError("external detector: failed to launch: " + cmd);
    }
    char buf[4096];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
      output.append(buf, got);
    const int rc = ::pclose(pipe);
    fs::remove(tmp);
    if (rc != 0)
      throw DetectorError("external detector: command exited with status " +
                          std::to_string(rc));
    json j;
    try {
      j = json::parse(output);
    } catch (const json::exception& e) {
      throw DetectorError(std::string("external detector: bad JSON output: ") +
                          e.what());
    }
    std::vector<RawDetection> out;
    for (const auto& d : j) {
      const auto& box = d.at("box");
      out.push_back({box.at(0).get<double>(), box.at(1).get<double>(),
                     box.at(2).get<double>(), box.at(3).get<double>(),
                     d.value("confidence", 1.0)});
    }
    return out;
  }

  std::string name() const override { return "external"; }

 private:
  std::string command_;
};

}  // namespace

DetectorHandle::DetectorHandle(std::string name,
                               std::shared_ptr<DetectorBackend> backend,
                               double min_confidence)
    : backend_name_(std::move(name)),
      backend_(std::move(backend)),
      min_confidence_(min_confidence),
      mu_(std::make_shared<std::mutex>()) {}

DetectorHandle DetectorHandle::create(const std::string& backend_name,
                                      const DetectorOptions& opts) {
  if (opts.min_confidence < 0.0 || opts.min_confidence > 1.0)
    throw DetectorError("detector: min_confidence must be in [0,1]");
  std::shared_ptr<DetectorBackend> backend;
  if (backend_name == "stub") {
    backend = std::make_shared<StubBackend>(opts.stub_manifest);
  } else if (backend_name == "scripted") {
    backend = std::make_shared<ScriptedBackend>(opts.scripted_boxes);
  } else if (backend_name == "external") {
    backend = std::make_shared<ExternalBackend>(opts.external_command);
  } else {
    throw DetectorError("detector: unknown backend '" + backend_name + "'");
  }
  return DetectorHandle(backend_name, std::move(backend), opts.min_confidence);
}

std::vector<HeadBox> DetectorHandle::detect_heads(
    const FrameImage& img, const std::string& image_ref) const {
  std::vector<RawDetection> raw;
  if (backend_->reentrant()) {
    raw = backend_->detect(img, image_ref);
  } else {
    std::lock_guard<std::mutex> lock(*mu_);
    raw = backend_->detect(img, image_ref);
  }

  std::vector<HeadBox> boxes;
  for (const auto& d : raw) {
    HeadBox b;
    b.x_min = std::clamp(d.x_min, 0.0, 1.0);
    b.y_min = std::clamp(d.y_min, 0.0, 1.0);
    b.x_max = std::clamp(d.x_max, 0.0, 1.0);
    b.y_max = std::clamp(d.y_max, 0.0, 1.0);
    b.confidence = std::clamp(d.confidence, 0.0, 1.0);
    if (!(b.x_min < b.x_max && b.y_min < b.y_max)) continue;  // degenerate
    if (b.confidence < min_confidence_) continue;
    boxes.push_back(b);
  }
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const HeadBox& a, const HeadBox& b) {
                     return a.confidence > b.confidence;
                   });
  return boxes;
}

}  // namespace gt360::detect
