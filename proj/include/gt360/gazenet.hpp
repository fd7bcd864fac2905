// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_GAZENET_HPP
#define GT360_GAZENET_HPP

#include <string>
#include <utility>
#include <vector>

#include "gt360/autograd.hpp"
#include "gt360/types.hpp"

namespace gt360::gazenet {

// Frozen scene encoder. The production system plugs a large pre-trained
// backbone here; this adapter provides a deterministic, seeded stand-in with
// the same interface: patch embedding, fixed 2-D sinusoidal positions and a
// configurable number of frozen transformer blocks. No parameter of the
// adapter ever receives gradient updates; weights are plain tensors that the
// optimizer cannot see.
struct EncoderConfig {
  int input_size = 448;
  int patch_size = 32;
  int embed_dim = 64;
  int blocks = 1;
  uint64_t seed = 7;

  int tokens_per_side() const { return input_size / patch_size; }
  int token_count() const { return tokens_per_side() * tokens_per_side(); }
  void validate() const;
  std::string to_json() const;
  static EncoderConfig from_json(const std::string& s);
};

class EncoderAdapter {
 public:
  explicit EncoderAdapter(const EncoderConfig& cfg = {});

  // [token_count, embed_dim] feature grid. The input must already have the
  // configured size; anything else is a shape error naming both sizes.
  nn::Tensor encode(const FrameImage& img) const;

  const EncoderConfig& config() const { return cfg_; }
  bool frozen() const { return true; }

  const std::vector<std::pair<std::string, nn::Tensor>>& weights() const {
    return weights_;
  }
  std::vector<std::pair<std::string, nn::Tensor>>& weights_mutable() {
    return weights_;
  }

 private:
  const nn::Tensor& weight(const std::string& name) const;

  EncoderConfig cfg_;
  std::vector<std::pair<std::string, nn::Tensor>> weights_;
  nn::Tensor pos_;  // fixed sinusoidal, not a weight
};

// Multi-scale fusion configuration. The three scale factors are part of the
// architecture and fixed.
struct MsfConfig {
  static constexpr double kScaleFactors[3] = {1.0, 0.5, 0.25};
  int fusion_channels = 64;
};

struct DecoderConfig {
  int token_grid = 14;  // tokens per side delivered by the encoder
  int encoder_dim = 64;
  MsfConfig msf;
  int heads = 4;
  int mlp_ratio = 4;
  int inout_hidden = 32;
  int hm_c1 = 32, hm_c2 = 16;  // heatmap conv stack widths
  uint64_t seed = 11;

  static constexpr int kHeatmapSize = 64;
  static constexpr int kVitBlocks = 1;

  int token_count() const { return token_grid * token_grid; }
  void validate() const;
  std::string to_json() const;
  static DecoderConfig from_json(const std::string& s);
};

// Lightweight gaze decoder: MSF over the frozen feature map, learned token
// positions, an additive head-prompt embedding, a single transformer block
// and two output heads (in/out logit; 64x64 heatmap logits).
class GazeDecoder {
 public:
  explicit GazeDecoder(const DecoderConfig& cfg = {});

  // Eq-style outputs: in-frame probability strictly inside (0,1) and the
  // 64x64 per-cell probability grid.
  std::pair<double, HeatmapGrid> decode(const nn::Tensor& features,
                                        const HeadBox& head) const;

  struct Logits {
    nn::Var inout;    // [1]
    nn::Var heatmap;  // [64,64]; null when not requested
  };
  Logits decode_logits(const nn::Tensor& features, const HeadBox& head,
                       bool want_heatmap = true) const;

  // Multi-scale fusion over an encoder feature grid [T,E]; returns the fused
  // map flattened back to [T, fusion_channels]. T must be a perfect square.
  nn::Tensor fuse(const nn::Tensor& features) const;
  nn::Var fuse_graph(const nn::Var& base_map) const;  // base_map: [S,S,E]

  std::vector<uint8_t> head_prompt_mask(const HeadBox& head) const;

  size_t learnable_param_count() const;
  const DecoderConfig& config() const { return cfg_; }
  const std::vector<std::pair<std::string, nn::Var>>& named_params() const {
    return named_;
  }
  std::vector<nn::Var> params() const;
  std::vector<nn::Var> heatmap_head_params() const;
  std::vector<nn::Var> inout_head_params() const;

 private:
  nn::Var p(const std::string& name) const;

  DecoderConfig cfg_;
  std::vector<std::pair<std::string, nn::Var>> named_;
};

// Learnable parameters across the model; the frozen encoder contributes zero.
size_t count_learnable_params(const GazeDecoder& dec, const EncoderAdapter& enc);

// Full-scale configuration (448 input, patch-14 grid, 768-d encoder,
// 256 fusion channels), sized against the 1.94M learnable-parameter budget.
DecoderConfig full_scale_decoder_config();

// Encoder + decoder pair with checkpoint IO.
struct GazeModel {
  EncoderAdapter encoder;
  GazeDecoder decoder;

  GazeModel() = default;
  GazeModel(const EncoderConfig& ec, const DecoderConfig& dc);

  std::string config_json() const;
  void save(const std::string& path, const std::string& stage = "init") const;
  static GazeModel load(const std::string& path);
};

}  // namespace gt360::gazenet

#endif  // GT360_GAZENET_HPP
