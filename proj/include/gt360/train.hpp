// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_TRAIN_HPP
#define GT360_TRAIN_HPP

#include <string>
#include <vector>

#include "gt360/data.hpp"
#include "gt360/gazenet.hpp"
#include "gt360/types.hpp"

namespace gt360::train {

enum class Stage { kPretrain, kFinetune };
enum class LrSchedule { kConstant, kCosineDecay };
enum class WarmupStyle { kConstantLr, kLinearRamp };

const char* to_string(Stage s);

struct TrainConfig {
  Stage stage = Stage::kPretrain;
  int warmup_epochs = 0;
  int main_epochs = 15;
  double lr = 1e-3;
  LrSchedule lr_schedule = LrSchedule::kCosineDecay;
  WarmupStyle warmup_style = WarmupStyle::kConstantLr;
  int batch_size = 32;
  double lambda = 1.0;  // weight of the in/out BCE term in the composite loss
  double weight_decay = 0.01;
  double gt_sigma_px = 3.0;  // Gaussian blur of ground-truth heatmaps
  bool augment = true;

  int total_epochs() const { return warmup_epochs + main_epochs; }
  void validate() const;

  // Recipe defaults: 15 plain epochs for the pretrain stage; 5 warm-up
  // epochs plus 10 cosine-decay epochs at 1e-5 for fine-tuning.
  static TrainConfig pretrain_defaults();
  static TrainConfig finetune_defaults();
};

// ---- composite loss, probability domain ----

// Mean pixel-wise BCE over the 64x64 grid for in-frame samples; exactly zero
// (value and gradient) for out-of-frame samples.
double heatmap_loss(const HeatmapGrid& pred, const HeatmapGrid& gt, bool is_ift);

double inout_loss(double p_ift, bool label_in);

// Pretrain: hm. Finetune: hm + lambda * io.
double total_loss(double hm, double io, const TrainConfig& cfg);

// Warm-up epochs hold the base lr (or ramp linearly when configured); the
// main phase follows lr * 0.5 * (1 + cos(pi * t)).
double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg);

// One sample, fully materialized for the step: frozen-encoder features, the
// head prompt, and (for in-frame samples) the blurred target grid.
struct PreparedSample {
  nn::Tensor features;
  HeadBox head;
  bool is_ift = false;
  nn::Tensor gt_heatmap;  // [64,64], valid when is_ift
};

// Graph for the composite loss over one batch. The heatmap branch is built
// only for in-frame samples, so out-of-frame batches leave every
// heatmap-head parameter with an exactly-zero gradient. Accumulators, when
// given, receive the unweighted per-term sums and counts.
nn::Var batch_loss(const gazenet::GazeDecoder& decoder,
                   const std::vector<PreparedSample>& batch,
                   const TrainConfig& cfg, double* sum_hm = nullptr,
                   double* sum_io = nullptr, size_t* n_hm = nullptr,
                   size_t* n_io = nullptr);

struct StageResult {
  std::vector<double> epoch_loss_hm;
  std::vector<double> epoch_loss_io;
  std::vector<double> epoch_lr;
  std::string checkpoint_path;
  std::string metrics_csv_path;
};

// Runs one training stage. Deterministic under a fixed seed; the encoder is
// never touched by the optimizer. Images resolve relative to image_root.
// Aborts with diagnostics on non-finite loss or stage/data mismatch.
StageResult run_stage(gazenet::GazeModel& model,
                      const std::vector<data::AnnotatedSample>& samples,
                      const TrainConfig& cfg, uint64_t seed,
                      const std::string& out_dir,
                      const std::string& image_root = "");

}  // namespace gt360::train

#endif  // GT360_TRAIN_HPP
