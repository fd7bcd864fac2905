// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "gt360/data.hpp"
#include "gt360/gazenet.hpp"
#include "testutil.hpp"

using namespace gt360;
using gazenet::DecoderConfig;
using gazenet::EncoderAdapter;
using gazenet::EncoderConfig;
using gazenet::GazeDecoder;

namespace {

EncoderConfig tiny_encoder() {
  EncoderConfig cfg;
  cfg.input_size = 64;
  cfg.patch_size = 16;
  cfg.embed_dim = 16;
  cfg.blocks = 1;
  return cfg;
}

DecoderConfig tiny_decoder() {
  DecoderConfig cfg;
  cfg.token_grid = 4;
  cfg.encoder_dim = 16;
  cfg.msf.fusion_channels = 16;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  cfg.inout_hidden = 8;
  cfg.hm_c1 = 4;
  cfg.hm_c2 = 4;
  return cfg;
}

}  // namespace

TEST_CASE("encode_scene token counts follow the patch arithmetic") {
  SUBCASE("desk scale: patch 32, dim 64 on 448 -> 196 x 64") {
    EncoderConfig cfg;
    cfg.input_size = 448;
    cfg.patch_size = 32;
    cfg.embed_dim = 64;
    cfg.blocks = 0;
    EncoderAdapter enc(cfg);
    const auto feats = enc.encode(testutil::noise_image(448, 448, 1));
    CHECK(feats.shape() == std::vector<int>{196, 64});
  }
  SUBCASE("patch 16 on 448 -> 784 tokens") {
    EncoderConfig cfg;
    cfg.input_size = 448;
    cfg.patch_size = 16;
    cfg.embed_dim = 16;
    cfg.blocks = 0;
    EncoderAdapter enc(cfg);
    const auto feats = enc.encode(testutil::noise_image(448, 448, 2));
    CHECK(feats.dim(0) == 784);
  }
}

TEST_CASE("encode_scene names expected and actual sizes on mismatch") {
  EncoderAdapter enc(tiny_encoder());
  try {
    enc.encode(testutil::noise_image(32, 48, 3));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("64x64") != std::string::npos);
    CHECK(msg.find("32x48") != std::string::npos);
  }
}

TEST_CASE("encoder is non-constant and deterministic") {
  EncoderAdapter enc(tiny_encoder());
  const auto a = enc.encode(testutil::noise_image(64, 64, 4));
  const auto b = enc.encode(testutil::noise_image(64, 64, 5));
  CHECK(a.vec() != b.vec());
  const auto a2 = enc.encode(testutil::noise_image(64, 64, 4));
  CHECK(a.vec() == a2.vec());
}

TEST_CASE("multiscale_fuse preserves base spatial shape") {
  DecoderConfig cfg;
  cfg.token_grid = 14;
  cfg.encoder_dim = 64;
  cfg.msf.fusion_channels = 64;
  GazeDecoder dec(cfg);
  Rng rng(6);
  const auto fused = dec.fuse(nn::Tensor::randn({196, 64}, rng));
  CHECK(fused.shape() == std::vector<int>{196, 64});
}

TEST_CASE("multiscale_fuse is zero on zero input with zero biases") {
  GazeDecoder dec(tiny_decoder());
  const auto fused = dec.fuse(nn::Tensor({16, 16}));
  for (size_t i = 0; i < fused.size(); ++i) CHECK(fused[i] == 0.0);
}

TEST_CASE("multiscale_fuse reduces to the identity branch when others are zeroed") {
  // fusion_channels == encoder_dim so the 1x1 conv can be the identity.
  GazeDecoder dec(tiny_decoder());
  for (const auto& [name, var] : dec.named_params()) {
    if (name == "msf_s1_w") {
      var->value.fill(0.0);
      for (int c = 0; c < 16; ++c) var->value[c * 16 + c] = 1.0;  // [1,1,E,F]
    } else if (name.rfind("msf_", 0) == 0) {
      var->value.fill(0.0);
    }
  }
  Rng rng(7);
  const nn::Tensor base = nn::Tensor::randn({16, 16}, rng);
  const auto fused = dec.fuse(base);
  for (size_t i = 0; i < base.size(); ++i)
    CHECK(fused[i] == doctest::Approx(base[i]).epsilon(1e-12));
}

TEST_CASE("multiscale_fuse rejects non-square token grids") {
  GazeDecoder dec(tiny_decoder());
  Rng rng(8);
  CHECK_THROWS_AS(dec.fuse(nn::Tensor::randn({15, 16}, rng)), ShapeError);
  CHECK_THROWS_AS(dec.fuse(nn::Tensor::randn({25, 16}, rng)), ShapeError);  // 5^2 != 4^2
}

TEST_CASE("decode_gaze emits a 64x64 heatmap and p_ift strictly in (0,1)") {
  GazeDecoder dec(tiny_decoder());
  Rng rng(9);
  const nn::Tensor feats = nn::Tensor::randn({16, 16}, rng);
  const auto [p_ift, hm] = dec.decode(feats, {0.25, 0.25, 0.75, 0.75, 1.0});
  CHECK(p_ift > 0.0);
  CHECK(p_ift < 1.0);
  CHECK(hm.values().size() == 64 * 64);
  CHECK(hm.in_unit_range());
}

TEST_CASE("decode_gaze responds to the head prompt") {
  GazeDecoder dec(tiny_decoder());
  Rng rng(10);
  const nn::Tensor feats = nn::Tensor::randn({16, 16}, rng);
  const auto [p1, hm1] = dec.decode(feats, {0.0, 0.0, 0.45, 0.45, 1.0});
  const auto [p2, hm2] = dec.decode(feats, {0.55, 0.55, 1.0, 1.0, 1.0});
  CHECK(p1 != p2);
  CHECK(hm1.values() != hm2.values());
}

TEST_CASE("head prompt mask marks covered token centers, never empty") {
  GazeDecoder dec(tiny_decoder());  // 4x4 grid, centers at 1/8 + k/4
  const auto mask = dec.head_prompt_mask({0.0, 0.0, 0.5, 0.5, 1.0});
  size_t count = 0;
  for (uint8_t m : mask) count += m;
  CHECK(count == 4);  // rows 0-1 x cols 0-1

  // A box smaller than one cell still prompts the cell under its center.
  const auto tiny = dec.head_prompt_mask({0.51, 0.51, 0.52, 0.52, 1.0});
  size_t tiny_count = 0;
  for (uint8_t m : tiny) tiny_count += m;
  CHECK(tiny_count == 1);
  CHECK(tiny[2 * 4 + 2] == 1);
}

TEST_CASE("count_learnable_params excludes the frozen encoder") {
  EncoderAdapter enc(tiny_encoder());
  GazeDecoder dec(tiny_decoder());
  CHECK(gazenet::count_learnable_params(dec, enc) == dec.learnable_param_count());

  // Single FC layer arithmetic: 10x5 weights + 5 biases.
  std::vector<nn::Var> fc = {nn::param(nn::Tensor({10, 5})),
                             nn::param(nn::Tensor({5}))};
  CHECK(nn::param_count(fc) == 55);
}

TEST_CASE("full-scale configuration lands within 5% of 1.94M") {
  GazeDecoder dec(gazenet::full_scale_decoder_config());
  const double count = static_cast<double>(dec.learnable_param_count());
  MESSAGE("full-scale learnable parameters: ", count);
  CHECK(count > 1.94e6 * 0.95);
  CHECK(count < 1.94e6 * 1.05);
}

TEST_CASE("decoder output shapes hold over random configs") {
  Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    DecoderConfig cfg;
    cfg.token_grid = rng.uniform_int(3, 8);
    cfg.encoder_dim = 4 * rng.uniform_int(2, 6);
    cfg.heads = rng.uniform_int(1, 2);
    cfg.msf.fusion_channels = cfg.heads * 4 * rng.uniform_int(1, 3);
    cfg.mlp_ratio = rng.uniform_int(1, 3);
    cfg.inout_hidden = rng.uniform_int(2, 8);
    cfg.hm_c1 = rng.uniform_int(2, 6);
    cfg.hm_c2 = rng.uniform_int(2, 6);
    cfg.seed = rng.next_u64();
    GazeDecoder dec(cfg);
    nn::Tensor feats =
        nn::Tensor::randn({cfg.token_grid * cfg.token_grid, cfg.encoder_dim}, rng);
    const auto [p_ift, hm] = dec.decode(feats, {0.2, 0.2, 0.7, 0.7, 1.0});
    CHECK(p_ift > 0.0);
    CHECK(p_ift < 1.0);
    CHECK(hm.values().size() == 64 * 64);
  }
}

TEST_CASE("tiny-decoder gradients match finite differences") {
  DecoderConfig cfg = tiny_decoder();
  cfg.encoder_dim = 8;
  cfg.msf.fusion_channels = 8;
  cfg.heads = 1;
  GazeDecoder dec(cfg);
  Rng rng(12);
  const nn::Tensor feats = nn::Tensor::randn({16, 8}, rng);
  const HeadBox head{0.1, 0.1, 0.6, 0.6, 1.0};
  const HeatmapGrid gt = data::build_gt_heatmap({0.4, 0.7});
  const nn::Tensor gt_t({64, 64}, gt.values());

  const auto rep = testutil::fd_check(dec.params(), [&] {
    const auto logits = dec.decode_logits(feats, head, true);
    nn::Var hm_loss = nn::bce_with_logits_mean(logits.heatmap, gt_t);
    nn::Var io_loss =
        nn::bce_with_logits_mean(logits.inout, nn::Tensor({1}, {1.0}));
    return nn::add(hm_loss, io_loss);  // composite loss, lambda = 1
  });
  MESSAGE("fd pass fraction: ", rep.pass_fraction(), " worst: ", rep.worst_rel);
  CHECK(rep.pass_fraction() >= 0.95);
}
