// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/eyecontact.hpp"

#include <algorithm>
#include <cmath>

#include "gt360/checkpoint.hpp"
#include "gt360/geometry.hpp"
#include "gt360/image_ops.hpp"
#include "gt360/optim.hpp"
#include "json.hpp"

namespace gt360::ec {

using nn::Tensor;
using nn::Var;

double clamp_probability(double p) {
  constexpr double kEps = 1e-12;
  return std::clamp(p, kEps, 1.0 - kEps);
}

std::string EcConfig::to_json() const {
  nlohmann::json j;
  j["input_size"] = input_size;
  j["crop_pad"] = crop_pad;
  j["c1"] = c1;
  j["c2"] = c2;
  j["c3"] = c3;
  j["seed"] = seed;
  return j.dump();
}

EcConfig EcConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  EcConfig c;
  c.input_size = j.at("input_size").get<int>();
  c.crop_pad = j.at("crop_pad").get<double>();
  c.c1 = j.at("c1").get<int>();
  c.c2 = j.at("c2").get<int>();
  c.c3 = j.at("c3").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

namespace {
Var he_conv(Rng& rng, int kh, int kw, int ci, int co) {
  const double std = std::sqrt(2.0 / (kh * kw * ci));
  return nn::param(Tensor::randn({kh, kw, ci, co}, rng, std));
}
}  // namespace

EcModel::EcModel(const EcConfig& cfg) : cfg_(cfg) {
  if (cfg_.input_size < 16) throw ConfigError("EcModel: input_size too small");
  Rng rng(Rng::derive(cfg_.seed, "ec-model"));
  conv1_w_ = he_conv(rng, 7, 7, 3, cfg_.c1);
  conv1_b_ = nn::param(Tensor({cfg_.c1}));
  conv2_w_ = he_conv(rng, 3, 3, cfg_.c1, cfg_.c2);
  conv2_b_ = nn::param(Tensor({cfg_.c2}));
  conv3_w_ = he_conv(rng, 3, 3, cfg_.c2, cfg_.c3);
  conv3_b_ = nn::param(Tensor({cfg_.c3}));
  fc_w_ = nn::param(Tensor::randn({cfg_.c3, 1}, rng, std::sqrt(1.0 / cfg_.c3)));
  fc_b_ = nn::param(Tensor({1}));
  params_ = {conv1_w_, conv1_b_, conv2_w_, conv2_b_,
             conv3_w_, conv3_b_, fc_w_,    fc_b_};
}

size_t EcModel::param_count() const { return nn::param_count(params_); }

Var EcModel::forward_logit(const FrameImage& crop) const {
  const FrameImage sized =
      resize_bilinear(crop, cfg_.input_size, cfg_.input_size);
  Var x = nn::constant(image_to_tensor(sized));
  x = nn::relu(nn::conv2d(x, conv1_w_, conv1_b_, /*stride=*/4, /*pad=*/3));
  x = nn::relu(nn::conv2d(x, conv2_w_, conv2_b_, /*stride=*/2, /*pad=*/1));
  x = nn::relu(nn::conv2d(x, conv3_w_, conv3_b_, /*stride=*/2, /*pad=*/1));
  Var pooled = nn::reshape(nn::global_avg_pool(x), {1, cfg_.c3});
  Var logit = nn::add_rowvec(nn::matmul(pooled, fc_w_), fc_b_);
  return nn::reshape(logit, {1});
}

double EcModel::predict_crop(const FrameImage& crop) const {
  const Var logit = forward_logit(crop);
  const double z = logit->value[0];
  const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                            : std::exp(z) / (1.0 + std::exp(z));
  return clamp_probability(p);
}

double EcModel::predict(const FrameImage& img, const HeadBox& box) const {
  return predict_crop(crop_head(img, box, cfg_.crop_pad));
}

std::vector<Result<double>> EcModel::predict_batch(
    const FrameImage& img, const std::vector<HeadBox>& boxes) const {
  std::vector<Result<double>> out;
  out.reserve(boxes.size());
  for (const auto& box : boxes) {
    try {
      out.push_back(Result<double>::ok(predict(img, box)));
    } catch (const Error& e) {
      out.push_back(Result<double>::err(e.what()));
    }
  }
  return out;
}

std::vector<double> EcModel::train(const std::vector<TrainSample>& samples,
                                   int epochs, double lr, uint64_t seed,
                                   int batch_size) {
  if (samples.empty()) throw TrainError("EcModel::train: no samples");
  nn::AdamW opt(params_);
  Rng shuffle_rng(Rng::derive(seed, "ec-shuffle"));
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> epoch_losses;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates with our own rng to keep runs reproducible.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[shuffle_rng.next_u64() % i]);
    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(batch_size));
      opt.zero_grad();
      Var total;
      for (size_t i = start; i < end; ++i) {
        const TrainSample& s = samples[order[i]];
        Var loss = nn::bce_with_logits_mean(forward_logit(s.crop),
                                            Tensor({1}, {s.ec ? 1.0 : 0.0}));
        total = total ? nn::add(total, loss) : loss;
      }
      total = nn::scale(total, 1.0 / static_cast<double>(end - start));
      nn::backward(total);
      opt.step(lr);
      epoch_loss += total->value[0];
      ++batches;
    }
    epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  return epoch_losses;
}

namespace {
const char* kTensorNames[] = {"conv1_w", "conv1_b", "conv2_w", "conv2_b",
                              "conv3_w", "conv3_b", "fc_w",    "fc_b"};
}

void EcModel::save(const std::string& path, const std::string& stage) const {
  io::Checkpoint ck;
  ck.kind = "ec";
  ck.stage = stage;
  ck.config_json = cfg_.to_json();
  ck.param_count = param_count();
  for (size_t i = 0; i < params_.size(); ++i)
    ck.add(kTensorNames[i], params_[i]->value);
  io::save_checkpoint(ck, path);
}

EcModel EcModel::load(const std::string& checkpoint_path) {
  const io::Checkpoint ck = io::load_checkpoint(checkpoint_path, "ec");
  EcModel model(EcConfig::from_json(ck.config_json));
  for (size_t i = 0; i < model.params_.size(); ++i) {
    const std::string name = kTensorNames[i];
    if (!ck.has(name))
      throw CheckpointError("ec checkpoint: schema mismatch, missing tensor '" +
                            name + "'");
    const Tensor& t = ck.get(name);
    if (!t.same_shape(model.params_[i]->value))
      throw CheckpointError("ec checkpoint: schema mismatch at tensor '" + name +
                            "': expected " + model.params_[i]->value.shape_str() +
                            ", got " + t.shape_str());
    model.params_[i]->value = t;
  }
  return model;
}

}  // namespace gt360::ec
