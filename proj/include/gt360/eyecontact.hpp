// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_EYECONTACT_HPP
#define GT360_EYECONTACT_HPP

#include <string>
#include <vector>

#include "gt360/autograd.hpp"
#include "gt360/common.hpp"
#include "gt360/types.hpp"

namespace gt360::ec {

// Stand-in architecture for the eye-contact classifier: a small strided
// conv stack over the cropped head, global average pooling and a linear
// logit. External checkpoints in the gt360 container format replace the
// seeded initialization when provided.
struct EcConfig {
  int input_size = 224;   // crops are resized (aspect-distorting) to this square
  double crop_pad = 0.2;  // fraction of box size added per side before cropping
  int c1 = 8, c2 = 16, c3 = 16;
  uint64_t seed = 1;

  std::string to_json() const;  // canonical, key-sorted
  static EcConfig from_json(const std::string& s);
};

class EcModel {
 public:
  explicit EcModel(const EcConfig& cfg = {});

  static EcModel load(const std::string& checkpoint_path);
  void save(const std::string& path, const std::string& stage = "init") const;

  // P_EC strictly inside (0,1). Deterministic: the model has no stochastic
  // layers and inference never mutates state.
  double predict(const FrameImage& img, const HeadBox& box) const;

  // Already-cropped head region.
  double predict_crop(const FrameImage& crop) const;

  // Element i equals predict(img, boxes[i]); a degenerate crop fails that
  // element only.
  std::vector<Result<double>> predict_batch(const FrameImage& img,
                                            const std::vector<HeadBox>& boxes) const;

  struct TrainSample {
    FrameImage crop;
    bool ec = false;
  };
  // Trains the stand-in; returns the mean loss per epoch.
  std::vector<double> train(const std::vector<TrainSample>& samples, int epochs,
                            double lr, uint64_t seed, int batch_size = 16);

  const EcConfig& config() const { return cfg_; }
  size_t param_count() const;
  std::vector<nn::Var>& params() { return params_; }
  nn::Var final_bias() { return fc_b_; }

 private:
  nn::Var forward_logit(const FrameImage& crop) const;

  EcConfig cfg_;
  nn::Var conv1_w_, conv1_b_, conv2_w_, conv2_b_, conv3_w_, conv3_b_;
  nn::Var fc_w_, fc_b_;
  std::vector<nn::Var> params_;
};

// Clamp keeping probabilities strictly inside (0,1) in double precision.
double clamp_probability(double p);

}  // namespace gt360::ec

#endif  // GT360_EYECONTACT_HPP
