// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "gt360/image_codec.hpp"
#include "gt360/image_ops.hpp"
#include "gt360/optim.hpp"

namespace gt360::train {

const char* to_string(Stage s) {
  return s == Stage::kPretrain ? "pretrain" : "finetune";
}

void TrainConfig::validate() const {
  if (lambda < 0.0) throw ConfigError("TrainConfig: lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (warmup_epochs < 0 || main_epochs < 1)
    throw ConfigError("TrainConfig: epochs out of range");
  if (lr <= 0.0) throw ConfigError("TrainConfig: lr must be > 0");
  if (weight_decay < 0.0) throw ConfigError("TrainConfig: weight_decay must be >= 0");
  if (gt_sigma_px <= 0.0) throw ConfigError("TrainConfig: gt_sigma_px must be > 0");
}

TrainConfig TrainConfig::pretrain_defaults() {
  TrainConfig c;
  c.stage = Stage::kPretrain;
  c.warmup_epochs = 0;
  c.main_epochs = 15;
  c.lr = 1e-3;
  c.lr_schedule = LrSchedule::kCosineDecay;
  return c;
}

TrainConfig TrainConfig::finetune_defaults() {
  TrainConfig c;
  c.stage = Stage::kFinetune;
  c.warmup_epochs = 5;
  c.main_epochs = 10;
  c.lr = 1e-5;
  c.lr_schedule = LrSchedule::kCosineDecay;
  return c;
}

namespace {
constexpr double kProbEps = 1e-12;

double bce(double p, double t) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}
}  // namespace

double heatmap_loss(const HeatmapGrid& pred, const HeatmapGrid& gt, bool is_ift) {
  if (!is_ift) return 0.0;
  const auto& p = pred.values();
  const auto& t = gt.values();
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += bce(p[i], t[i]);
  return total / static_cast<double>(p.size());
}

double inout_loss(double p_ift, bool label_in) {
  return bce(p_ift, label_in ? 1.0 : 0.0);
}

double total_loss(double hm, double io, const TrainConfig& cfg) {
  if (cfg.stage == Stage::kPretrain) return hm;
  return hm + cfg.lambda * io;
}

double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg) {
  if (step < 0 || step > total_steps)
    throw TrainError("lr_at: step out of [0, total_steps]");
  if (total_steps == 0) return cfg.lr;
  const int64_t warmup_steps =
      cfg.total_epochs() == 0
          ? 0
          : total_steps * cfg.warmup_epochs / cfg.total_epochs();
  if (step < warmup_steps) {
    if (cfg.warmup_style == WarmupStyle::kLinearRamp)
      return cfg.lr * static_cast<double>(step + 1) /
             static_cast<double>(warmup_steps);
    return cfg.lr;
  }
  if (cfg.lr_schedule == LrSchedule::kConstant) return cfg.lr;
  const int64_t main_steps = total_steps - warmup_steps;
  if (main_steps == 0) return cfg.lr;
  const double t =
      static_cast<double>(step - warmup_steps) / static_cast<double>(main_steps);
  return cfg.lr * 0.5 * (1.0 + std::cos(3.141592653589793 * t));
}

nn::Var batch_loss(const gazenet::GazeDecoder& decoder,
                   const std::vector<PreparedSample>& batch,
                   const TrainConfig& cfg, double* sum_hm, double* sum_io,
                   size_t* n_hm, size_t* n_io) {
  if (batch.empty()) throw TrainError("batch_loss: empty batch");
  nn::Var loss;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& prep : batch) {
    const auto logits =
        decoder.decode_logits(prep.features, prep.head, /*want_heatmap=*/prep.is_ift);
    nn::Var sample_loss;
    if (prep.is_ift) {
      sample_loss = nn::bce_with_logits_mean(logits.heatmap, prep.gt_heatmap);
      if (sum_hm) *sum_hm += sample_loss->value[0];
      if (n_hm) ++*n_hm;
    }
    if (cfg.stage == Stage::kFinetune) {
      nn::Var io_loss = nn::bce_with_logits_mean(
          logits.inout, nn::Tensor({1}, {prep.is_ift ? 1.0 : 0.0}));
      if (sum_io) *sum_io += io_loss->value[0];
      if (n_io) ++*n_io;
      io_loss = nn::scale(io_loss, cfg.lambda);
      sample_loss = sample_loss ? nn::add(sample_loss, io_loss) : io_loss;
    }
    if (sample_loss) {
      sample_loss = nn::scale(sample_loss, inv_b);
      loss = loss ? nn::add(loss, sample_loss) : sample_loss;
    }
  }
  if (!loss) throw TrainError("batch_loss: batch produced no loss terms");
  return loss;
}

namespace {

class ImageCache {
 public:
  explicit ImageCache(std::string root) : root_(std::move(root)) {}

  const FrameImage& get(const std::string& ref) {
    auto it = cache_.find(ref);
    if (it != cache_.end()) return it->second;
    namespace fs = std::filesystem;
    fs::path p(ref);
    if (p.is_relative() && !root_.empty()) p = fs::path(root_) / p;
    auto [ins, ok] = cache_.emplace(ref, io::load_image(p.string()));
    return ins->second;
  }

 private:
  std::string root_;
  std::unordered_map<std::string, FrameImage> cache_;
};

}  // namespace

StageResult run_stage(gazenet::GazeModel& model,
                      const std::vector<data::AnnotatedSample>& samples,
                      const TrainConfig& cfg, uint64_t seed,
                      const std::string& out_dir,
                      const std::string& image_root) {
  cfg.validate();
  if (samples.empty()) throw TrainError("run_stage: no samples");
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (cfg.stage == Stage::kPretrain) {
      if (s.label != data::Label::kIFT || !s.target)
        throw TrainError("run_stage: pretrain requires IFT targets; sample " +
                         std::to_string(i) + " ('" + s.image_ref + "') is " +
                         data::to_string(s.label));
    } else {
      if (s.label != data::Label::kIFT && s.label != data::Label::kOFT)
        throw TrainError("run_stage: finetune requires in/out labels; sample " +
                         std::to_string(i) + " ('" + s.image_ref + "') is " +
                         data::to_string(s.label));
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Bitwise snapshot guards the frozen-encoder contract.
  std::vector<nn::Tensor> encoder_before;
  for (const auto& [name, t] : model.encoder.weights()) encoder_before.push_back(t);

  const int input_size = model.encoder.config().input_size;
  data::AugmentConfig aug_cfg;
  aug_cfg.out_width = input_size;
  aug_cfg.out_height = input_size;

  ImageCache cache(image_root);
  const auto params = model.decoder.params();
  nn::AdamW opt(params, 0.9, 0.999, 1e-8, cfg.weight_decay);

  const int64_t batches_per_epoch =
      static_cast<int64_t>((samples.size() + cfg.batch_size - 1) / cfg.batch_size);
  const int64_t total_steps = batches_per_epoch * cfg.total_epochs();

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(Rng::derive(seed, "train-shuffle"));

  StageResult result;
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.total_epochs(); ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);

    double sum_hm = 0.0, sum_io = 0.0;
    size_t n_hm = 0, n_io = 0;
    const double epoch_lr = lr_at(step, total_steps, cfg);

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const double lr = lr_at(step, total_steps, cfg);

      // Materialize the whole batch before the step consumes it.
      std::vector<PreparedSample> batch;
      batch.reserve(end - start);
      for (size_t bi = start; bi < end; ++bi) {
        const auto& s = samples[order[bi]];
        const FrameImage& raw = cache.get(s.image_ref);
        FrameImage sized;
        if (cfg.augment) {
          const uint64_t aug_seed =
              Rng::derive(seed, "aug-" + std::to_string(epoch) + "-" +
                                    std::to_string(order[bi]));
          sized = data::augment(raw, s.head, s.target, aug_seed, aug_cfg).image;
        } else {
          sized = resize_bilinear(raw, input_size, input_size);
        }
        PreparedSample prep;
        prep.features = model.encoder.encode(sized);
        prep.is_ift = s.label == data::Label::kIFT;
        if (prep.is_ift) {
          const HeatmapGrid gt = data::build_gt_heatmap(
              *s.target, HeatmapGrid::kSize, cfg.gt_sigma_px);
          prep.gt_heatmap = nn::Tensor(
              {HeatmapGrid::kSize, HeatmapGrid::kSize}, gt.values());
        }
        prep.head = s.head;
        batch.push_back(std::move(prep));
      }

      opt.zero_grad();
      nn::Var loss =
          batch_loss(model.decoder, batch, cfg, &sum_hm, &sum_io, &n_hm, &n_io);
      if (!std::isfinite(loss->value[0]))
        throw TrainError("run_stage: non-finite loss " +
                         std::to_string(loss->value[0]) + " at epoch " +
                         std::to_string(epoch) + ", step " + std::to_string(step));
      nn::backward(loss);
      opt.step(lr);
      ++step;
    }

    result.epoch_loss_hm.push_back(n_hm ? sum_hm / static_cast<double>(n_hm) : 0.0);
    result.epoch_loss_io.push_back(n_io ? sum_io / static_cast<double>(n_io) : 0.0);
    result.epoch_lr.push_back(epoch_lr);
  }

  // Frozen-encoder contract: bitwise identical before/after.
  {
    const auto& after = model.encoder.weights();
    for (size_t i = 0; i < after.size(); ++i) {
      const auto& a = encoder_before[i].vec();
      const auto& b = after[i].second.vec();
      if (a != b)
        throw TrainError("run_stage: frozen encoder weight '" +
                         after[i].first + "' changed during training");
    }
  }

  const std::string stage_name = to_string(cfg.stage);
  result.checkpoint_path =
      (fs::path(out_dir) / ("gaze_" + stage_name + ".ck")).string();
  model.save(result.checkpoint_path, stage_name);

  result.metrics_csv_path =
      (fs::path(out_dir) / ("metrics_" + stage_name + ".csv")).string();
  std::ofstream csv(result.metrics_csv_path);
  if (!csv) throw TrainError("run_stage: cannot write metrics CSV");
  csv << "epoch,split,loss_hm,loss_io,lr\n";
  char buf[160];
  for (size_t e = 0; e < result.epoch_loss_hm.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,train,%.17g,%.17g,%.17g\n", e,
                  result.epoch_loss_hm[e], result.epoch_loss_io[e],
                  result.epoch_lr[e]);
    csv << buf;
  }
  return result;
}

}  // namespace gt360::train
