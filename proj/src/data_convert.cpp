// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>

#include "gt360/data.hpp"

namespace gt360::data {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double to_double(const std::string& s, const std::string& ctx, size_t line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(ctx + ": line " + std::to_string(line_no) +
                    ": not a number: '" + s + "'");
  }
}

// Applies `fn` to each non-empty, non-comment CSV row. A first row whose
// second field is not numeric is treated as a header and skipped.
void for_each_row(const std::string& path,
                  const std::function<void(const std::vector<std::string>&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("converter: cannot open " + path);
  std::string line;
  size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (first) {
      first = false;
      if (fields.size() >= 2) {
        try {
          (void)std::stod(fields[1]);
        } catch (const std::exception&) {
          continue;  // header row
        }
      }
    }
    fn(fields, line_no);
  }
}

HeadBox parse_box(const std::vector<std::string>& f, size_t off,
                  const std::string& ctx, size_t line_no) {
  HeadBox b;
  b.x_min = to_double(f[off + 0], ctx, line_no);
  b.y_min = to_double(f[off + 1], ctx, line_no);
  b.x_max = to_double(f[off + 2], ctx, line_no);
  b.y_max = to_double(f[off + 3], ctx, line_no);
  return b;
}

void require_fields(const std::vector<std::string>& f, size_t n,
                    const std::string& ctx, size_t line_no) {
  if (f.size() < n)
    throw DataError(ctx + ": line " + std::to_string(line_no) + ": expected " +
                    std::to_string(n) + " fields, got " +
                    std::to_string(f.size()));
}

// image,x0,y0,x1,y1,gaze_x,gaze_y
std::vector<AnnotatedSample> convert_gazefollow(const std::string& in_dir) {
  const std::string path = (fs::path(in_dir) / "annotations.csv").string();
  std::vector<AnnotatedSample> out;
  for_each_row(path, [&](const std::vector<std::string>& f, size_t ln) {
    require_fields(f, 7, "gazefollow", ln);
    AnnotatedSample s;
    s.image_ref = f[0];
    s.head = parse_box(f, 1, "gazefollow", ln);
    s.label = Label::kIFT;
    s.target = Point{to_double(f[5], "gazefollow", ln),
                     to_double(f[6], "gazefollow", ln)};
    s.source = "gazefollow";
    out.push_back(std::move(s));
  });
  return out;
}

// image,x0,y0,x1,y1,inout,gaze_x,gaze_y (gaze ignored when inout=0)
std::vector<AnnotatedSample> convert_vat(const std::string& in_dir) {
  const std::string path = (fs::path(in_dir) / "annotations.csv").string();
  std::vector<AnnotatedSample> out;
  for_each_row(path, [&](const std::vector<std::string>& f, size_t ln) {
    require_fields(f, 6, "vat", ln);
    AnnotatedSample s;
    s.image_ref = f[0];
    s.head = parse_box(f, 1, "vat", ln);
    const bool in_frame = to_double(f[5], "vat", ln) != 0.0;
    if (in_frame) {
      require_fields(f, 8, "vat", ln);
      s.label = Label::kIFT;
      s.target = Point{to_double(f[6], "vat", ln), to_double(f[7], "vat", ln)};
    } else {
      s.label = Label::kOFT;
    }
    s.source = "vat";
    out.push_back(std::move(s));
  });
  return out;
}

// image,x0,y0,x1,y1,fc_x,fc_y,fc_z,gt_x,gt_y,gt_z  (millimeters)
std::vector<AnnotatedSample> convert_mpii(const std::string& in_dir) {
  const std::string path = (fs::path(in_dir) / "records.csv").string();
  std::vector<AnnotatedSample> out;
  for_each_row(path, [&](const std::vector<std::string>& f, size_t ln) {
    require_fields(f, 11, "mpii", ln);
    AnnotatedSample s;
    s.image_ref = f[0];
    s.head = parse_box(f, 1, "mpii", ln);
    Gaze3dRecord rec;
    for (int i = 0; i < 3; ++i) rec.fc[i] = to_double(f[5 + i], "mpii", ln);
    for (int i = 0; i < 3; ++i) rec.gt[i] = to_double(f[8 + i], "mpii", ln);
    s.label = label_ec_mpii(rec);
    s.source = "mpii";
    out.push_back(std::move(s));
  });
  return out;
}

// image,x0,y0,x1,y1,elevation_deg,yaw_deg
std::vector<AnnotatedSample> convert_columbia(const std::string& in_dir) {
  const std::string path = (fs::path(in_dir) / "records.csv").string();
  std::vector<AnnotatedSample> out;
  for_each_row(path, [&](const std::vector<std::string>& f, size_t ln) {
    require_fields(f, 7, "columbia", ln);
    AnnotatedSample s;
    s.image_ref = f[0];
    s.head = parse_box(f, 1, "columbia", ln);
    s.label = label_ec_columbia(to_double(f[5], "columbia", ln),
                                to_double(f[6], "columbia", ln));
    s.source = "columbia";
    out.push_back(std::move(s));
  });
  return out;
}

// videos.csv: video_id,frame_count
// targets/<video_id>.csv: frame,visible,x,y,box_x0,box_y0,box_x1,box_y1
std::vector<AnnotatedSample> convert_eyediap(const std::string& in_dir) {
  std::vector<VideoIndexEntry> index;
  for_each_row((fs::path(in_dir) / "videos.csv").string(),
               [&](const std::vector<std::string>& f, size_t ln) {
                 require_fields(f, 2, "eyediap videos", ln);
                 index.push_back(
                     {f[0], static_cast<int>(to_double(f[1], "eyediap", ln))});
               });
  const auto sampled = sample_eyediap_frames(index);

  std::vector<AnnotatedSample> out;
  std::string current_video;
  // frame -> (visible, target, box)
  std::map<int, std::tuple<bool, Point, HeadBox>> frames;
  auto load_video = [&](const std::string& vid) {
    frames.clear();
    const std::string path =
        (fs::path(in_dir) / "targets" / (vid + ".csv")).string();
    for_each_row(path, [&](const std::vector<std::string>& f, size_t ln) {
      require_fields(f, 8, "eyediap targets", ln);
      const int frame = static_cast<int>(to_double(f[0], "eyediap", ln));
      const bool visible = to_double(f[1], "eyediap", ln) != 0.0;
      const Point p{to_double(f[2], "eyediap", ln),
                    to_double(f[3], "eyediap", ln)};
      frames[frame] = {visible, p, parse_box(f, 4, "eyediap", ln)};
    });
    current_video = vid;
  };

  for (const auto& [vid, frame] : sampled) {
    if (vid != current_video) load_video(vid);
    const auto it = frames.find(frame);
    if (it == frames.end())
      throw DataError("eyediap: video '" + vid + "' missing frame " +
                      std::to_string(frame) + " in targets file");
    const auto& [visible, target, box] = it->second;
    AnnotatedSample s;
    s.image_ref = vid + "/frame_" + std::to_string(frame) + ".png";
    s.head = box;
    if (visible) {
      s.label = Label::kIFT;
      s.target = target;
    } else {
      s.label = Label::kOFT;
    }
    s.source = "eyediap";
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

ConvertStats convert_dataset(const std::string& source, const std::string& in_dir,
                             const std::string& out_manifest) {
  std::vector<AnnotatedSample> samples;
  if (source == "gazefollow")
    samples = convert_gazefollow(in_dir);
  else if (source == "vat")
    samples = convert_vat(in_dir);
  else if (source == "mpii")
    samples = convert_mpii(in_dir);
  else if (source == "columbia")
    samples = convert_columbia(in_dir);
  else if (source == "eyediap")
    samples = convert_eyediap(in_dir);
  else
    throw DataError("unknown converter source '" + source +
                    "' (expected gazefollow|vat|mpii|columbia|eyediap)");

  ConvertStats stats;
  stats.total = samples.size();
  size_t oft = 0;
  for (const auto& s : samples) {
    s.validate();
    stats.per_label[to_string(s.label)]++;
    if (s.label == Label::kOFT) ++oft;
  }
  stats.oft_fraction =
      samples.empty() ? 0.0 : static_cast<double>(oft) / samples.size();
  save_manifest(samples, out_manifest);
  return stats;
}

}  // namespace gt360::data
