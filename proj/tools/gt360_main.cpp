// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0
//
// gt360 command-line entry point: infer / train / eval / data subcommands.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gt360/data.hpp"
#include "gt360/eval.hpp"
#include "gt360/geometry.hpp"
#include "gt360/image_codec.hpp"
#include "gt360/pipeline.hpp"
#include "gt360/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gt360;

namespace {

#ifndef GT360_VERSION
#define GT360_VERSION "dev"
#endif

struct InferArgs {
  std::string image;
  std::string out;
  bool emit_json = false;
  double sigma = 0.85;
  std::string ec_weights, gaze_weights;
  std::string detector;  // stub | scripted | external (inferred when empty)
  std::string detector_manifest, detector_command;
  std::vector<std::vector<double>> boxes;
  double min_confidence = 0.0;
  std::string heatmap_dir;
  bool no_heatmaps = false;
  int input_size = 448;
  int patch_size = 32;
  int embed_dim = 64;
  int encoder_blocks = 1;
};

// Values sourced from the [detector] config section; command-line flags on
// the infer subcommand take precedence over these.
struct DetectorSection {
  std::string backend;
  std::string manifest;
  std::string command;
  double min_confidence = 0.0;
};

struct TrainArgs {
  std::string stage;
  std::string manifest;
  std::string out_dir;
  std::string image_root;
  std::string gaze_weights;
  double lr = -1.0;  // negative -> stage default
  int batch_size = 32;
  int warmup_epochs = -1;
  int main_epochs = -1;
  double lambda = 1.0;
  double weight_decay = 0.01;
  double gt_sigma_px = 3.0;
  bool no_augment = false;
  std::string lr_schedule = "cosine";
  std::string warmup_style = "constant";
  int input_size = 448;
  int patch_size = 32;
  int embed_dim = 64;
  int encoder_blocks = 1;
  int fusion_channels = 64;
  int heads = 4;
  int mlp_ratio = 4;
  int inout_hidden = 32;
  int hm_c1 = 32;
  int hm_c2 = 16;
};

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string report;
  std::string point_mode = "argmax";
  double sigma_px = 3.0;
};

json verdict_to_json(const std::string& image, const GazeVerdict& v,
                     const std::string& heatmap_path) {
  json j;
  j["image"] = image;
  j["box"] = {v.head.x_min, v.head.y_min, v.head.x_max, v.head.y_max};
  j["class"] = to_string(v.cls);
  j["p_ec"] = v.p_ec;
  j["p_ift"] = v.p_ift ? json(*v.p_ift) : json(nullptr);
  j["target"] = v.target_point
                    ? json({v.target_point->x, v.target_point->y})
                    : json(nullptr);
  j["heatmap_path"] = heatmap_path.empty() ? json(nullptr) : json(heatmap_path);
  return j;
}

int run_infer(InferArgs a, const DetectorSection& det_cfg, uint64_t seed) {
  if (a.detector.empty()) a.detector = det_cfg.backend;
  if (a.detector_manifest.empty()) a.detector_manifest = det_cfg.manifest;
  if (a.detector_command.empty()) a.detector_command = det_cfg.command;
  if (a.min_confidence == 0.0) a.min_confidence = det_cfg.min_confidence;

  pipeline::SystemConfig cfg;
  cfg.pipeline.sigma = a.sigma;
  cfg.pipeline.input_width = a.input_size;
  cfg.pipeline.input_height = a.input_size;
  cfg.ec_weights = a.ec_weights;
  cfg.gaze_weights = a.gaze_weights;
  cfg.ec_config.seed = Rng::derive(seed, "ec");
  cfg.encoder_config.input_size = a.input_size;
  cfg.encoder_config.patch_size = a.patch_size;
  cfg.encoder_config.embed_dim = a.embed_dim;
  cfg.encoder_config.blocks = a.encoder_blocks;
  cfg.encoder_config.seed = Rng::derive(seed, "encoder");
  cfg.decoder_config.token_grid = cfg.encoder_config.tokens_per_side();
  cfg.decoder_config.encoder_dim = a.embed_dim;
  cfg.decoder_config.msf.fusion_channels = a.embed_dim;
  cfg.decoder_config.seed = Rng::derive(seed, "decoder");

  std::string backend = a.detector;
  if (backend.empty()) {
    if (!a.boxes.empty())
      backend = "scripted";
    else if (!a.detector_manifest.empty())
      backend = "stub";
    else if (!a.detector_command.empty())
      backend = "external";
    else
      throw ConfigError(
          "infer: no detector configured; pass --box, --detector-manifest or "
          "--detector-command");
  }
  cfg.detector_backend = backend;
  cfg.detector_options.min_confidence = a.min_confidence;
  cfg.detector_options.stub_manifest = a.detector_manifest;
  cfg.detector_options.external_command = a.detector_command;
  for (const auto& b : a.boxes) {
    if (b.size() != 4 && b.size() != 5)
      throw ConfigError("infer: --box needs x0,y0,x1,y1[,confidence]");
    cfg.detector_options.scripted_boxes.push_back(
        {b[0], b[1], b[2], b[3], b.size() == 5 ? b[4] : 1.0});
  }

  const pipeline::Gt360System sys = pipeline::Gt360System::create(cfg);
  const FrameImage img = io::load_image(a.image);
  const auto results = sys.infer_frame(img, a.image);

  std::string hm_dir = a.heatmap_dir;
  if (hm_dir.empty())
    hm_dir = a.out.empty() ? "." : fs::path(a.out).parent_path().string();
  if (hm_dir.empty()) hm_dir = ".";
  const std::string stem = fs::path(a.image).stem().string();

  std::vector<GazeVerdict> ok_verdicts;
  size_t head_idx = 0;
  for (const auto& r : results) {
    if (a.emit_json) {
      if (!r) {
        json j;
        j["image"] = a.image;
        j["error"] = r.error();
        std::cout << j.dump() << "\n";
      } else {
        std::string hm_path;
        if (r.value().heatmap && !a.no_heatmaps) {
          hm_path = (fs::path(hm_dir) /
                     (stem + "_head" + std::to_string(head_idx) + "_heatmap.json"))
                        .string();
          json hj;
          hj["size"] = HeatmapGrid::kSize;
          hj["values"] = r.value().heatmap->values();
          std::ofstream hm_out(hm_path);
          if (!hm_out) throw Error("infer: cannot write " + hm_path);
          hm_out << hj.dump();
        }
        std::cout << verdict_to_json(a.image, r.value(), hm_path).dump() << "\n";
      }
    } else if (!r) {
      std::cerr << "head " << head_idx << ": " << r.error() << "\n";
    } else {
      const auto& v = r.value();
      std::cout << "head " << head_idx << ": " << to_string(v.cls)
                << " p_ec=" << v.p_ec;
      if (v.p_ift) std::cout << " p_ift=" << *v.p_ift;
      if (v.target_point)
        std::cout << " target=(" << v.target_point->x << ","
                  << v.target_point->y << ")";
      std::cout << "\n";
    }
    if (r) ok_verdicts.push_back(r.value());
    ++head_idx;
  }

  if (!a.out.empty())
    io::save_image(pipeline::render_overlay(img, ok_verdicts), a.out);
  return 0;
}

int run_train(const TrainArgs& a, uint64_t seed) {
  train::TrainConfig cfg = a.stage == "pretrain"
                               ? train::TrainConfig::pretrain_defaults()
                               : train::TrainConfig::finetune_defaults();
  if (a.lr > 0.0) cfg.lr = a.lr;
  if (a.warmup_epochs >= 0) cfg.warmup_epochs = a.warmup_epochs;
  if (a.main_epochs >= 0) cfg.main_epochs = a.main_epochs;
  cfg.batch_size = a.batch_size;
  cfg.lambda = a.lambda;
  cfg.weight_decay = a.weight_decay;
  cfg.gt_sigma_px = a.gt_sigma_px;
  cfg.augment = !a.no_augment;
  cfg.lr_schedule = a.lr_schedule == "constant" ? train::LrSchedule::kConstant
                                                : train::LrSchedule::kCosineDecay;
  cfg.warmup_style = a.warmup_style == "ramp" ? train::WarmupStyle::kLinearRamp
                                              : train::WarmupStyle::kConstantLr;

  gazenet::GazeModel model;
  if (!a.gaze_weights.empty()) {
    model = gazenet::GazeModel::load(a.gaze_weights);
  } else {
    gazenet::EncoderConfig ec;
    ec.input_size = a.input_size;
    ec.patch_size = a.patch_size;
    ec.embed_dim = a.embed_dim;
    ec.blocks = a.encoder_blocks;
    ec.seed = Rng::derive(seed, "encoder");
    gazenet::DecoderConfig dc;
    dc.token_grid = ec.tokens_per_side();
    dc.encoder_dim = a.embed_dim;
    dc.msf.fusion_channels = a.fusion_channels;
    dc.heads = a.heads;
    dc.mlp_ratio = a.mlp_ratio;
    dc.inout_hidden = a.inout_hidden;
    dc.hm_c1 = a.hm_c1;
    dc.hm_c2 = a.hm_c2;
    dc.seed = Rng::derive(seed, "decoder");
    model = gazenet::GazeModel(ec, dc);
  }

  const auto report = data::load_unified(a.manifest);
  if (!report.rejects.empty()) {
    for (const auto& rej : report.rejects)
      std::cerr << "manifest line " << rej.line << ": " << rej.reason << "\n";
    throw DataError("train: manifest has " +
                    std::to_string(report.rejects.size()) + " invalid lines");
  }
  std::string image_root = a.image_root;
  if (image_root.empty())
    image_root = fs::path(a.manifest).parent_path().string();

  std::cout << "stage=" << train::to_string(cfg.stage)
            << " samples=" << report.samples.size()
            << " learnable_params=" << model.decoder.learnable_param_count()
            << "\n";
  const auto result =
      train::run_stage(model, report.samples, cfg, seed, a.out_dir, image_root);
  std::cout << "checkpoint=" << result.checkpoint_path << "\n"
            << "metrics=" << result.metrics_csv_path << "\n"
            << "final_loss_hm=" << result.epoch_loss_hm.back() << "\n";
  return 0;
}

HeatmapGrid load_heatmap_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("eval: cannot open heatmap " + path);
  json j;
  in >> j;
  return HeatmapGrid(j.at("values").get<std::vector<double>>());
}

double iou(const HeadBox& a, const HeadBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) -
                                      std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) -
                                      std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

int run_eval(const EvalArgs& a) {
  const auto truth_report = data::load_unified(a.truth);
  if (!truth_report.rejects.empty())
    throw DataError("eval: truth manifest has " +
                    std::to_string(truth_report.rejects.size()) +
                    " invalid lines (first at line " +
                    std::to_string(truth_report.rejects.front().line) + ": " +
                    truth_report.rejects.front().reason + ")");

  std::ifstream in(a.pred);
  if (!in) throw Error("eval: cannot open predictions " + a.pred);
  const fs::path pred_dir = fs::path(a.pred).parent_path();

  struct Pred {
    std::string image;
    GazeVerdict verdict;
  };
  std::vector<Pred> preds;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("eval: bad JSON at " + a.pred + ":" +
                      std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("error")) continue;  // failed heads carry no verdict
    Pred p;
    p.image = j.value("image", "");
    const auto& box = j.at("box");
    p.verdict.head = {box.at(0).get<double>(), box.at(1).get<double>(),
                      box.at(2).get<double>(), box.at(3).get<double>(), 1.0};
    const std::string cls = j.at("class").get<std::string>();
    p.verdict.cls = cls == "EC"    ? GazeClass::kEyeContact
                    : cls == "OFT" ? GazeClass::kOutOfFrame
                                   : GazeClass::kInFrame;
    p.verdict.p_ec = j.value("p_ec", 0.0);
    if (j.contains("p_ift") && !j.at("p_ift").is_null())
      p.verdict.p_ift = j.at("p_ift").get<double>();
    if (j.contains("target") && !j.at("target").is_null())
      p.verdict.target_point = Point{j.at("target").at(0).get<double>(),
                                     j.at("target").at(1).get<double>()};
    if (j.contains("heatmap_path") && !j.at("heatmap_path").is_null()) {
      fs::path hp(j.at("heatmap_path").get<std::string>());
      if (hp.is_relative() && fs::exists(pred_dir / hp)) hp = pred_dir / hp;
      p.verdict.heatmap = load_heatmap_json(hp.string());
    }
    preds.push_back(std::move(p));
  }

  // Match predictions to truth by image (path or basename) + best IoU.
  auto image_key = [](const std::string& s) {
    return fs::path(s).filename().string();
  };
  std::vector<bool> used(preds.size(), false);
  std::vector<eval::EvalRecord> records;
  size_t unmatched_truth = 0;
  for (const auto& t : truth_report.samples) {
    int best = -1;
    double best_iou = 0.5;  // minimum overlap for a match
    for (size_t i = 0; i < preds.size(); ++i) {
      if (used[i]) continue;
      if (preds[i].image != t.image_ref &&
          image_key(preds[i].image) != image_key(t.image_ref))
        continue;
      const double ov = iou(preds[i].verdict.head, t.head);
      if (ov >= best_iou) {
        best_iou = ov;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      ++unmatched_truth;
      continue;
    }
    used[best] = true;
    records.push_back({preds[best].verdict, t});
  }

  const auto mode = a.point_mode == "centroid" ? eval::PointExtract::kCentroid
                                               : eval::PointExtract::kArgmax;
  const eval::SuiteReport suite = eval::evaluate_suite(records, mode, a.sigma_px);

  json out = json::parse(suite.to_json());
  out["matching"] = {{"matched", records.size()},
                     {"unmatched_truth", unmatched_truth},
                     {"unmatched_pred",
                      preds.size() - static_cast<size_t>(std::count(
                                         used.begin(), used.end(), true))}};
  std::ofstream rep(a.report);
  if (!rep) throw Error("eval: cannot write report " + a.report);
  rep << out.dump(2) << "\n";
  std::cout << "report=" << a.report << " records=" << records.size() << "\n";
  return 0;
}

int run_label_ec(const std::string& format, const std::string& in_path,
                 const std::string& out_path, double threshold_mm) {
  std::ifstream in(in_path);
  if (!in) throw DataError("label-ec: cannot open " + in_path);
  std::ofstream out(out_path);
  if (!out) throw DataError("label-ec: cannot write " + out_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric && line_no == 1) continue;  // header
    if (!numeric)
      throw DataError("label-ec: non-numeric field at line " +
                      std::to_string(line_no));
    if (format == "mpii") {
      if (vals.size() < 6)
        throw DataError("label-ec: mpii rows need fc_x,fc_y,fc_z,gt_x,gt_y,gt_z");
      data::Gaze3dRecord rec;
      for (int i = 0; i < 3; ++i) rec.fc[i] = vals[i];
      for (int i = 0; i < 3; ++i) rec.gt[i] = vals[3 + i];
      out << line << "," << data::to_string(data::label_ec_mpii(rec, threshold_mm))
          << "," << data::ec_distance(rec) << "\n";
    } else {
      if (vals.size() < 2)
        throw DataError("label-ec: columbia rows need elevation_deg,yaw_deg");
      out << line << ","
          << data::to_string(data::label_ec_columbia(vals[0], vals[1])) << "\n";
    }
  }
  return 0;
}

int run_sample_eyediap(const std::string& index_path, const std::string& out_path,
                       int per_video) {
  std::ifstream in(index_path);
  if (!in) throw DataError("sample-eyediap: cannot open " + index_path);
  std::vector<data::VideoIndexEntry> index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("sample-eyediap: expected video_id,frame_count at line " +
                      std::to_string(line_no));
    const std::string id = line.substr(0, comma);
    try {
      index.push_back({id, std::stoi(line.substr(comma + 1))});
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw DataError("sample-eyediap: bad frame count at line " +
                      std::to_string(line_no));
    }
  }
  const auto frames = data::sample_eyediap_frames(index, per_video);
  std::ofstream out(out_path);
  if (!out) throw DataError("sample-eyediap: cannot write " + out_path);
  out << "video_id,frame\n";
  for (const auto& [vid, frame] : frames) out << vid << "," << frame << "\n";
  std::cout << "sampled=" << frames.size() << " videos=" << index.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gt360: unrestricted gaze-target estimation"};
  app.set_version_flag("--version", std::string("gt360 ") + GT360_VERSION);
  app.set_config("--config", "", "TOML configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.fallthrough();  // global options may follow the subcommand name

  uint64_t seed = 0;
  app.add_option("--seed", seed,
                 "Seed for all randomized paths (env GT360_SEED)")
      ->capture_default_str();

  // [detector] config section (keys detector.backend, detector.manifest,
  // detector.command, detector.min-confidence).
  DetectorSection det_cfg;
  auto* det_section = app.add_subcommand("detector");
  det_section->configurable(true);
  det_section->group("");  // config-only carrier, hidden from help
  det_section->add_option("--backend", det_cfg.backend, "stub|scripted|external");
  det_section->add_option("--manifest", det_cfg.manifest, "Stub sidecar JSONL");
  det_section->add_option("--command", det_cfg.command, "External command");
  det_section->add_option("--min-confidence", det_cfg.min_confidence,
                          "Confidence floor");

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Classify gaze targets in an image");
  infer->add_option("--image", infer_args.image, "Input image (png/jpeg/ppm)")
      ->required();
  infer->add_option("--out", infer_args.out, "Overlay output path (png/ppm)");
  infer->add_flag("--json", infer_args.emit_json, "Emit one JSON object per head");
  infer->add_option("--sigma", infer_args.sigma,
                    "EC cut-off probability (env GT360_SIGMA)")
      ->capture_default_str();
  infer->add_option("--ec-weights", infer_args.ec_weights, "EC checkpoint");
  infer->add_option("--gaze-weights", infer_args.gaze_weights, "Gaze checkpoint");
  infer->add_option("--detector", infer_args.detector,
                    "Detector backend: stub|scripted|external");
  infer->add_option("--detector-manifest", infer_args.detector_manifest,
                    "JSONL sidecar for the stub backend");
  infer->add_option("--detector-command", infer_args.detector_command,
                    "Command template for the external backend ({input})");
  infer->add_option("--box", infer_args.boxes,
                    "Manual head box x0,y0,x1,y1[,conf]; repeatable")
      ->delimiter(',');
  infer->add_option("--min-confidence", infer_args.min_confidence,
                    "Drop detections below this confidence");
  infer->add_option("--heatmap-dir", infer_args.heatmap_dir,
                    "Directory for IFT heatmap JSON files");
  infer->add_flag("--no-heatmaps", infer_args.no_heatmaps,
                  "Skip writing heatmap files in --json mode");
  infer->add_option("--input-size", infer_args.input_size, "Encoder input size");
  infer->add_option("--patch-size", infer_args.patch_size, "Encoder patch size");
  infer->add_option("--embed-dim", infer_args.embed_dim, "Encoder embed dim");
  infer->add_option("--encoder-blocks", infer_args.encoder_blocks,
                    "Frozen encoder blocks");

  TrainArgs train_args;
  auto* traincmd = app.add_subcommand("train", "Run a training stage");
  traincmd->add_option("--stage", train_args.stage, "pretrain|finetune")
      ->required()
      ->check(CLI::IsMember({"pretrain", "finetune"}));
  traincmd->add_option("--manifest", train_args.manifest, "JSONL manifest")
      ->required();
  traincmd->add_option("--out", train_args.out_dir, "Output directory")
      ->required();
  traincmd->add_option("--image-root", train_args.image_root,
                       "Base directory for relative image refs");
  traincmd->add_option("--gaze-weights", train_args.gaze_weights,
                       "Initialize from this checkpoint");
  traincmd->add_option("--lr", train_args.lr, "Base learning rate");
  traincmd->add_option("--batch-size", train_args.batch_size, "Batch size")
      ->capture_default_str();
  traincmd->add_option("--warmup-epochs", train_args.warmup_epochs,
                       "Warm-up epochs (stage default when omitted)");
  traincmd->add_option("--epochs", train_args.main_epochs,
                       "Main epochs (stage default when omitted)");
  traincmd->add_option("--lambda", train_args.lambda,
                       "Weight of the in/out loss term")
      ->capture_default_str();
  traincmd->add_option("--weight-decay", train_args.weight_decay, "AdamW decay")
      ->capture_default_str();
  traincmd->add_option("--gt-sigma-px", train_args.gt_sigma_px,
                       "Ground-truth heatmap blur (cells)")
      ->capture_default_str();
  traincmd->add_flag("--no-augment", train_args.no_augment,
                     "Disable photometric augmentation");
  traincmd->add_option("--lr-schedule", train_args.lr_schedule, "cosine|constant")
      ->check(CLI::IsMember({"cosine", "constant"}));
  traincmd->add_option("--warmup-style", train_args.warmup_style, "constant|ramp")
      ->check(CLI::IsMember({"constant", "ramp"}));
  traincmd->add_option("--input-size", train_args.input_size, "Encoder input");
  traincmd->add_option("--patch-size", train_args.patch_size, "Encoder patch");
  traincmd->add_option("--embed-dim", train_args.embed_dim, "Encoder dim");
  traincmd->add_option("--encoder-blocks", train_args.encoder_blocks,
                       "Frozen encoder blocks");
  traincmd->add_option("--fusion-channels", train_args.fusion_channels,
                       "MSF output channels");
  traincmd->add_option("--heads", train_args.heads, "Decoder attention heads");
  traincmd->add_option("--mlp-ratio", train_args.mlp_ratio, "Decoder MLP ratio");
  traincmd->add_option("--inout-hidden", train_args.inout_hidden,
                       "In/out head hidden width");
  traincmd->add_option("--hm-c1", train_args.hm_c1, "Heatmap conv width 1");
  traincmd->add_option("--hm-c2", train_args.hm_c2, "Heatmap conv width 2");

  EvalArgs eval_args;
  auto* evalcmd = app.add_subcommand("eval", "Score predictions against truth");
  evalcmd->add_option("--pred", eval_args.pred, "Predictions JSONL")->required();
  evalcmd->add_option("--truth", eval_args.truth, "Truth manifest")->required();
  evalcmd->add_option("--report", eval_args.report, "Report JSON path")
      ->required();
  evalcmd->add_option("--point-mode", eval_args.point_mode, "argmax|centroid")
      ->check(CLI::IsMember({"argmax", "centroid"}));
  evalcmd->add_option("--sigma-px", eval_args.sigma_px,
                      "Gaussian sigma for the AUC positive set")
      ->capture_default_str();

  auto* datacmd = app.add_subcommand("data", "Dataset utilities");
  datacmd->require_subcommand(1);

  std::string conv_source, conv_in, conv_out;
  auto* convert = datacmd->add_subcommand("convert", "Convert a dataset");
  convert->add_option("--source", conv_source, "Dataset family")
      ->required()
      ->check(CLI::IsMember({"gazefollow", "vat", "mpii", "columbia", "eyediap"}));
  convert->add_option("--in", conv_in, "Input directory")->required();
  convert->add_option("--out", conv_out, "Output manifest")->required();

  std::string label_format, label_in, label_out;
  double threshold_mm = 30.0;
  auto* labelec = datacmd->add_subcommand("label-ec", "Derive EC labels");
  labelec->add_option("--format", label_format, "mpii|columbia")
      ->required()
      ->check(CLI::IsMember({"mpii", "columbia"}));
  labelec->add_option("--in", label_in, "Input CSV")->required();
  labelec->add_option("--out", label_out, "Output CSV")->required();
  labelec->add_option("--threshold-mm", threshold_mm, "EC distance threshold")
      ->capture_default_str();

  std::string eyediap_index, eyediap_out;
  int per_video = 50;
  auto* sample = datacmd->add_subcommand("sample-eyediap", "Even frame sampling");
  sample->add_option("--index", eyediap_index, "videos.csv (video_id,frame_count)")
      ->required();
  sample->add_option("--out", eyediap_out, "Output CSV")->required();
  sample->add_option("--per-video", per_video, "Frames per video")
      ->capture_default_str();

  // Option precedence is flag > environment > config file. CLI11 applies
  // config files before environment variables, so environment overrides are
  // injected as trailing arguments when the flag itself is absent.
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  const auto inject_env = [&args](const char* flag, const char* env,
                                  const char* required_subcommand) {
    for (const auto& a : args)
      if (a == flag || a.rfind(std::string(flag) + "=", 0) == 0) return;
    const char* value = std::getenv(env);
    if (!value) return;
    if (required_subcommand) {
      bool found = false;
      for (const auto& a : args) found = found || a == required_subcommand;
      if (!found) return;
    }
    args.emplace_back(flag);
    args.emplace_back(value);
  };
  inject_env("--seed", "GT360_SEED", nullptr);
  inject_env("--sigma", "GT360_SIGMA", "infer");
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*infer) return run_infer(infer_args, det_cfg, seed);
    if (*traincmd) return run_train(train_args, seed);
    if (*evalcmd) return run_eval(eval_args);
    if (*convert) {
      const auto stats = data::convert_dataset(conv_source, conv_in, conv_out);
      std::cout << "converted=" << stats.total;
      for (const auto& [label, count] : stats.per_label)
        std::cout << " " << label << "=" << count;
      char frac[32];
      std::snprintf(frac, sizeof frac, "%.3f", stats.oft_fraction);
      std::cout << " oft_fraction=" << frac << "\n";
      return 0;
    }
    if (*labelec) return run_label_ec(label_format, label_in, label_out, threshold_mm);
    if (*sample) return run_sample_eyediap(eyediap_index, eyediap_out, per_video);
    std::cerr << app.help() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
