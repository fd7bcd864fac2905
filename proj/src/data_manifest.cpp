// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include "gt360/data.hpp"
#include "json.hpp"

namespace gt360::data {

using nlohmann::json;

const char* to_string(Label l) {
  switch (l) {
    case Label::kEC: return "EC";
    case Label::kOFT: return "OFT";
    case Label::kIFT: return "IFT";
    case Label::kUnknown: return "UNKNOWN";
  }
  return "?";
}

Label label_from_string(const std::string& s) {
  if (s == "EC") return Label::kEC;
  if (s == "OFT") return Label::kOFT;
  if (s == "IFT") return Label::kIFT;
  if (s == "UNKNOWN") return Label::kUnknown;
  throw DataError("unknown label '" + s + "'");
}

void AnnotatedSample::validate() const {
  if (!head.valid()) throw DataError("invalid head box");
  if (label == Label::kIFT) {
    if (!target) throw DataError("label IFT requires a target point");
    if (target->x < 0.0 || target->x > 1.0 || target->y < 0.0 || target->y > 1.0)
      throw DataError("IFT target outside [0,1]^2");
  } else if (label == Label::kEC || label == Label::kOFT) {
    if (target) throw DataError("label " + std::string(to_string(label)) +
                                " must not carry a target point");
  }
}

std::string AnnotatedSample::to_jsonl() const {
  json j;
  j["image"] = image_ref;
  j["box"] = {head.x_min, head.y_min, head.x_max, head.y_max};
  j["label"] = to_string(label);
  if (target)
    j["target"] = {target->x, target->y};
  else
    j["target"] = nullptr;
  j["source"] = source;
  return j.dump();
}

LoadReport load_unified(const std::string& manifest_path, bool check_images) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest: " + manifest_path);
  const auto base_dir = std::filesystem::path(manifest_path).parent_path();

  LoadReport report;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      AnnotatedSample s;
      s.image_ref = j.at("image").get<std::string>();
      const auto& box = j.at("box");
      if (!box.is_array() || box.size() != 4)
        throw DataError("box must be [x0,y0,x1,y1]");
      s.head.x_min = box.at(0).get<double>();
      s.head.y_min = box.at(1).get<double>();
      s.head.x_max = box.at(2).get<double>();
      s.head.y_max = box.at(3).get<double>();
      s.head.confidence = j.value("confidence", 1.0);
      s.label = label_from_string(j.at("label").get<std::string>());
      if (j.contains("target") && !j.at("target").is_null()) {
        const auto& t = j.at("target");
        s.target = Point{t.at(0).get<double>(), t.at(1).get<double>()};
      }
      s.source = j.value("source", "");
      s.validate();
      if (check_images) {
        std::filesystem::path p(s.image_ref);
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p))
          throw DataError("missing image: " + p.string());
      }
      report.per_source[s.source]++;
      report.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      report.rejects.push_back({line_no, std::string("bad JSON: ") + e.what()});
    } catch (const Error& e) {
      report.rejects.push_back({line_no, e.what()});
    }
  }
  return report;
}

void save_manifest(const std::vector<AnnotatedSample>& samples,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open manifest for writing: " + path);
  for (const auto& s : samples) out << s.to_jsonl() << "\n";
}

}  // namespace gt360::data
