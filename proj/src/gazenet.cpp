// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/gazenet.hpp"

#include <algorithm>
#include <cmath>

#include "gt360/checkpoint.hpp"
#include "gt360/image_ops.hpp"
#include "json.hpp"

namespace gt360::gazenet {

using nn::Tensor;
using nn::Var;

// ------------------------------------------------------------------- encoder

void EncoderConfig::validate() const {
  if (input_size < 1 || patch_size < 1 || input_size % patch_size != 0)
    throw ConfigError("EncoderConfig: input_size must be a multiple of patch_size");
  if (embed_dim < 8 || embed_dim % 4 != 0)
    throw ConfigError("EncoderConfig: embed_dim must be >= 8 and divisible by 4");
  if (blocks < 0) throw ConfigError("EncoderConfig: blocks must be >= 0");
}

std::string EncoderConfig::to_json() const {
  nlohmann::json j;
  j["input_size"] = input_size;
  j["patch_size"] = patch_size;
  j["embed_dim"] = embed_dim;
  j["blocks"] = blocks;
  j["seed"] = seed;
  return j.dump();
}

EncoderConfig EncoderConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  EncoderConfig c;
  c.input_size = j.at("input_size").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.blocks = j.at("blocks").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

namespace {

Tensor sinusoidal_positions(int side, int dim) {
  // 2-D positions: first half of channels encode the row, second the column.
  Tensor pos({side * side, dim});
  const int half = dim / 2;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int t = r * side + c;
      for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -2.0 * (i / 2) / half);
        const double vr = r * freq, vc = c * freq;
        pos.at2(t, i) = (i % 2 == 0) ? std::sin(vr) : std::cos(vr);
        pos.at2(t, half + i) = (i % 2 == 0) ? std::sin(vc) : std::cos(vc);
      }
    }
  return pos;
}

// Plain-tensor transformer block used by the frozen encoder. Built on the
// same autograd ops with constant leaves: no closures are created, so this
// is pure forward math.
Var frozen_block(Var x, const std::vector<std::pair<std::string, Tensor>>& w,
                 const std::string& prefix, int heads) {
  auto get = [&](const std::string& n) -> Var {
    for (const auto& [name, t] : w)
      if (name == prefix + n) return nn::constant(t);
    throw Error("encoder: missing weight " + prefix + n);
  };
  const int dim = x->value.dim(1);
  const int dh = dim / heads;
  Var h = nn::layer_norm(x, get("ln1_g"), get("ln1_b"));
  Var qkv = nn::add_rowvec(nn::matmul(h, get("qkv_w")), get("qkv_b"));
  std::vector<Var> outs;
  for (int i = 0; i < heads; ++i) {
    Var q = nn::slice_cols(qkv, i * dh, (i + 1) * dh);
    Var k = nn::slice_cols(qkv, dim + i * dh, dim + (i + 1) * dh);
    Var v = nn::slice_cols(qkv, 2 * dim + i * dh, 2 * dim + (i + 1) * dh);
    Var scores = nn::scale(nn::matmul(q, nn::transpose(k)), 1.0 / std::sqrt(dh));
    outs.push_back(nn::matmul(nn::softmax_rows(scores), v));
  }
  Var attn = nn::add_rowvec(nn::matmul(nn::concat_cols(outs), get("proj_w")),
                            get("proj_b"));
  x = nn::add(x, attn);
  Var m = nn::layer_norm(x, get("ln2_g"), get("ln2_b"));
  m = nn::gelu(nn::add_rowvec(nn::matmul(m, get("fc1_w")), get("fc1_b")));
  m = nn::add_rowvec(nn::matmul(m, get("fc2_w")), get("fc2_b"));
  return nn::add(x, m);
}

constexpr int kEncoderHeads = 4;

}  // namespace

EncoderAdapter::EncoderAdapter(const EncoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(Rng::derive(cfg_.seed, "encoder"));
  const int pdim = cfg_.patch_size * cfg_.patch_size * 3;
  const int e = cfg_.embed_dim;
  auto add = [this](const std::string& n, Tensor t) {
    weights_.emplace_back(n, std::move(t));
  };
  add("pe_w", Tensor::randn({pdim, e}, rng, std::sqrt(1.0 / pdim)));
  add("pe_b", Tensor({e}));
  for (int b = 0; b < cfg_.blocks; ++b) {
    const std::string p = "blk" + std::to_string(b) + "_";
    add(p + "ln1_g", Tensor::full({e}, 1.0));
    add(p + "ln1_b", Tensor({e}));
    add(p + "qkv_w", Tensor::randn({e, 3 * e}, rng, 0.02));
    add(p + "qkv_b", Tensor({3 * e}));
    add(p + "proj_w", Tensor::randn({e, e}, rng, 0.02));
    add(p + "proj_b", Tensor({e}));
    add(p + "ln2_g", Tensor::full({e}, 1.0));
    add(p + "ln2_b", Tensor({e}));
    add(p + "fc1_w", Tensor::randn({e, 2 * e}, rng, 0.02));
    add(p + "fc1_b", Tensor({2 * e}));
    add(p + "fc2_w", Tensor::randn({2 * e, e}, rng, 0.02));
    add(p + "fc2_b", Tensor({e}));
  }
  pos_ = sinusoidal_positions(cfg_.tokens_per_side(), e);
}

const Tensor& EncoderAdapter::weight(const std::string& name) const {
  for (const auto& [n, t] : weights_)
    if (n == name) return t;
  throw Error("encoder: missing weight " + name);
}

Tensor EncoderAdapter::encode(const FrameImage& img) const {
  if (img.width() != cfg_.input_size || img.height() != cfg_.input_size)
    throw ShapeError("encode_scene: expected " + std::to_string(cfg_.input_size) +
                     "x" + std::to_string(cfg_.input_size) + " input, got " +
                     std::to_string(img.width()) + "x" +
                     std::to_string(img.height()));
  const int s = cfg_.tokens_per_side(), p = cfg_.patch_size;
  const int pdim = p * p * 3;
  const Tensor pixels = image_to_tensor(img);

  Tensor patches({s * s, pdim});
  for (int ty = 0; ty < s; ++ty)
    for (int tx = 0; tx < s; ++tx) {
      double* dst = patches.data() + (static_cast<size_t>(ty) * s + tx) * pdim;
      for (int py = 0; py < p; ++py)
        for (int px = 0; px < p; ++px)
          for (int c = 0; c < 3; ++c)
            *dst++ = pixels.at3(ty * p + py, tx * p + px, c);
    }

  Var x = nn::add_rowvec(nn::matmul(nn::constant(std::move(patches)),
                                    nn::constant(weight("pe_w"))),
                         nn::constant(weight("pe_b")));
  x = nn::add(x, nn::constant(pos_));
  for (int b = 0; b < cfg_.blocks; ++b)
    x = frozen_block(x, weights_, "blk" + std::to_string(b) + "_", kEncoderHeads);
  return x->value;
}

// ------------------------------------------------------------------- decoder

void DecoderConfig::validate() const {
  if (token_grid < 2) throw ConfigError("DecoderConfig: token_grid must be >= 2");
  if (encoder_dim < 1) throw ConfigError("DecoderConfig: encoder_dim must be >= 1");
  const int f = msf.fusion_channels;
  if (f < heads || f % heads != 0)
    throw ConfigError("DecoderConfig: fusion_channels must be divisible by heads");
  if (mlp_ratio < 1 || inout_hidden < 1 || hm_c1 < 1 || hm_c2 < 1)
    throw ConfigError("DecoderConfig: layer widths must be positive");
}

std::string DecoderConfig::to_json() const {
  nlohmann::json j;
  j["token_grid"] = token_grid;
  j["encoder_dim"] = encoder_dim;
  j["fusion_channels"] = msf.fusion_channels;
  j["heads"] = heads;
  j["mlp_ratio"] = mlp_ratio;
  j["inout_hidden"] = inout_hidden;
  j["hm_c1"] = hm_c1;
  j["hm_c2"] = hm_c2;
  j["seed"] = seed;
  return j.dump();
}

DecoderConfig DecoderConfig::from_json(const std::string& s) {
  const auto j = nlohmann::json::parse(s);
  DecoderConfig c;
  c.token_grid = j.at("token_grid").get<int>();
  c.encoder_dim = j.at("encoder_dim").get<int>();
  c.msf.fusion_channels = j.at("fusion_channels").get<int>();
  c.heads = j.at("heads").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  c.inout_hidden = j.at("inout_hidden").get<int>();
  c.hm_c1 = j.at("hm_c1").get<int>();
  c.hm_c2 = j.at("hm_c2").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

GazeDecoder::GazeDecoder(const DecoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(Rng::derive(cfg_.seed, "decoder"));
  const int e = cfg_.encoder_dim, f = cfg_.msf.fusion_channels;
  const int t = cfg_.token_count();
  auto add = [this](const std::string& n, Tensor init) {
    named_.emplace_back(n, nn::param(std::move(init)));
  };
  auto he = [&rng](std::vector<int> shape, int fan_in) {
    return Tensor::randn(std::move(shape), rng, std::sqrt(2.0 / fan_in));
  };

  // One 1x1 alignment conv per scale branch.
  for (const char* s : {"s1", "s2", "s4"}) {
    add(std::string("msf_") + s + "_w", he({1, 1, e, f}, e));
    add(std::string("msf_") + s + "_b", Tensor({f}));
  }
  add("pos", Tensor::randn({t, f}, rng, 0.02));
  add("prompt", Tensor::randn({f}, rng, 0.02));

  add("ln1_g", Tensor::full({f}, 1.0));
  add("ln1_b", Tensor({f}));
  add("qkv_w", Tensor::randn({f, 3 * f}, rng, 0.02));
  add("qkv_b", Tensor({3 * f}));
  add("proj_w", Tensor::randn({f, f}, rng, 0.02));
  add("proj_b", Tensor({f}));
  add("ln2_g", Tensor::full({f}, 1.0));
  add("ln2_b", Tensor({f}));
  add("fc1_w", Tensor::randn({f, cfg_.mlp_ratio * f}, rng, 0.02));
  add("fc1_b", Tensor({cfg_.mlp_ratio * f}));
  add("fc2_w", Tensor::randn({cfg_.mlp_ratio * f, f}, rng, 0.02));
  add("fc2_b", Tensor({f}));
  add("lnf_g", Tensor::full({f}, 1.0));
  add("lnf_b", Tensor({f}));

  add("io1_w", Tensor::randn({f, cfg_.inout_hidden}, rng, std::sqrt(1.0 / f)));
  add("io1_b", Tensor({cfg_.inout_hidden}));
  add("io2_w", Tensor::randn({cfg_.inout_hidden, 1}, rng,
                             std::sqrt(1.0 / cfg_.inout_hidden)));
  add("io2_b", Tensor({1}));

  add("hm1_w", he({3, 3, f, cfg_.hm_c1}, 9 * f));
  add("hm1_b", Tensor({cfg_.hm_c1}));
  add("hm2_w", he({3, 3, cfg_.hm_c1, cfg_.hm_c2}, 9 * cfg_.hm_c1));
  add("hm2_b", Tensor({cfg_.hm_c2}));
  add("hm3_w", he({3, 3, cfg_.hm_c2, 1}, 9 * cfg_.hm_c2));
  // Start the heatmap logits low: target grids are mostly empty.
  add("hm3_b", Tensor::full({1}, -2.0));
}

Var GazeDecoder::p(const std::string& name) const {
  for (const auto& [n, v] : named_)
    if (n == name) return v;
  throw Error("decoder: missing parameter " + name);
}

std::vector<Var> GazeDecoder::params() const {
  std::vector<Var> out;
  out.reserve(named_.size());
  for (const auto& [n, v] : named_) out.push_back(v);
  return out;
}

std::vector<Var> GazeDecoder::heatmap_head_params() const {
  return {p("hm1_w"), p("hm1_b"), p("hm2_w"), p("hm2_b"), p("hm3_w"), p("hm3_b")};
}

std::vector<Var> GazeDecoder::inout_head_params() const {
  return {p("io1_w"), p("io1_b"), p("io2_w"), p("io2_b")};
}

size_t GazeDecoder::learnable_param_count() const {
  return nn::param_count(params());
}

Var GazeDecoder::fuse_graph(const Var& base_map) const {
  const int s = cfg_.token_grid;
  nn::require_shape(base_map->value, {s, s, cfg_.encoder_dim}, "multiscale_fuse");
  Var b1 = nn::conv2d(base_map, p("msf_s1_w"), p("msf_s1_b"), 1, 0);
  Var b2 = nn::conv2d(nn::avg_pool_ceil(base_map, 2), p("msf_s2_w"),
                      p("msf_s2_b"), 1, 0);
  Var b4 = nn::conv2d(nn::avg_pool_ceil(base_map, 4), p("msf_s4_w"),
                      p("msf_s4_b"), 1, 0);
  b2 = nn::upsample_nearest(b2, s, s);
  b4 = nn::upsample_nearest(b4, s, s);
  return nn::add(nn::add(b1, b2), b4);
}

nn::Tensor GazeDecoder::fuse(const Tensor& features) const {
  if (features.ndim() != 2)
    throw ShapeError("multiscale_fuse: expected [tokens, dim] features");
  const int t = features.dim(0);
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(t))));
  if (s * s != t)
    throw ShapeError("multiscale_fuse: token count " + std::to_string(t) +
                     " is not a square grid");
  if (s != cfg_.token_grid)
    throw ShapeError("multiscale_fuse: expected " +
                     std::to_string(cfg_.token_grid) + "^2 tokens, got " +
                     std::to_string(s) + "^2");
  Var base = nn::reshape(nn::constant(features),
                         {s, s, cfg_.encoder_dim});
  Var fused = fuse_graph(base);
  return nn::reshape(fused, {t, cfg_.msf.fusion_channels})->value;
}

std::vector<uint8_t> GazeDecoder::head_prompt_mask(const HeadBox& head) const {
  head.validate("decode_gaze");
  const int s = cfg_.token_grid;
  std::vector<uint8_t> mask(static_cast<size_t>(s) * s, 0);
  bool any = false;
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) {
      const double cx = (c + 0.5) / s, cy = (r + 0.5) / s;
      if (cx >= head.x_min && cx < head.x_max && cy >= head.y_min &&
          cy < head.y_max) {
        mask[static_cast<size_t>(r) * s + c] = 1;
        any = true;
      }
    }
  if (!any) {
    // Box smaller than a token cell: mark the cell containing its center.
    const Point ctr = head.center();
    const int c = std::clamp(static_cast<int>(ctr.x * s), 0, s - 1);
    const int r = std::clamp(static_cast<int>(ctr.y * s), 0, s - 1);
    mask[static_cast<size_t>(r) * s + c] = 1;
  }
  return mask;
}

GazeDecoder::Logits GazeDecoder::decode_logits(const Tensor& features,
                                               const HeadBox& head,
                                               bool want_heatmap) const {
  const int s = cfg_.token_grid, t = cfg_.token_count();
  const int f = cfg_.msf.fusion_channels;
  nn::require_shape(features, {t, cfg_.encoder_dim}, "decode_gaze features");

  Var base = nn::reshape(nn::constant(features), {s, s, cfg_.encoder_dim});
  Var tok = nn::reshape(fuse_graph(base), {t, f});
  tok = nn::add(tok, p("pos"));
  tok = nn::add_masked_rows(tok, head_prompt_mask(head), p("prompt"));

  // Single pre-norm transformer block.
  {
    Var h = nn::layer_norm(tok, p("ln1_g"), p("ln1_b"));
    Var qkv = nn::add_rowvec(nn::matmul(h, p("qkv_w")), p("qkv_b"));
    const int dh = f / cfg_.heads;
    std::vector<Var> outs;
    for (int i = 0; i < cfg_.heads; ++i) {
      Var q = nn::slice_cols(qkv, i * dh, (i + 1) * dh);
      Var k = nn::slice_cols(qkv, f + i * dh, f + (i + 1) * dh);
      Var v = nn::slice_cols(qkv, 2 * f + i * dh, 2 * f + (i + 1) * dh);
      Var scores =
          nn::scale(nn::matmul(q, nn::transpose(k)), 1.0 / std::sqrt(dh));
      outs.push_back(nn::matmul(nn::softmax_rows(scores), v));
    }
    Var attn = nn::add_rowvec(nn::matmul(nn::concat_cols(outs), p("proj_w")),
                              p("proj_b"));
    tok = nn::add(tok, attn);
    Var m = nn::layer_norm(tok, p("ln2_g"), p("ln2_b"));
    m = nn::gelu(nn::add_rowvec(nn::matmul(m, p("fc1_w")), p("fc1_b")));
    m = nn::add_rowvec(nn::matmul(m, p("fc2_w")), p("fc2_b"));
    tok = nn::add(tok, m);
  }
  tok = nn::layer_norm(tok, p("lnf_g"), p("lnf_b"));

  Logits out;
  {
    Var pooled = nn::reshape(nn::mean_rows(tok), {1, f});
    Var h = nn::gelu(nn::add_rowvec(nn::matmul(pooled, p("io1_w")), p("io1_b")));
    Var logit = nn::add_rowvec(nn::matmul(h, p("io2_w")), p("io2_b"));
    out.inout = nn::reshape(logit, {1});
  }
  if (want_heatmap) {
    const int hm = DecoderConfig::kHeatmapSize;
    Var m = nn::reshape(tok, {s, s, f});
    m = nn::relu(nn::conv2d(m, p("hm1_w"), p("hm1_b"), 1, 1));
    m = nn::upsample_bilinear(m, 2 * s, 2 * s);
    m = nn::relu(nn::conv2d(m, p("hm2_w"), p("hm2_b"), 1, 1));
    m = nn::upsample_bilinear(m, hm, hm);
    m = nn::conv2d(m, p("hm3_w"), p("hm3_b"), 1, 1);
    out.heatmap = nn::reshape(m, {hm, hm});
  }
  return out;
}

std::pair<double, HeatmapGrid> GazeDecoder::decode(const Tensor& features,
                                                   const HeadBox& head) const {
  const Logits lg = decode_logits(features, head, true);
  auto sig = [](double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                    : std::exp(z) / (1.0 + std::exp(z));
  };
  constexpr double kEps = 1e-12;
  const double p_ift = std::clamp(sig(lg.inout->value[0]), kEps, 1.0 - kEps);
  HeatmapGrid grid;
  for (int i = 0; i < DecoderConfig::kHeatmapSize * DecoderConfig::kHeatmapSize; ++i)
    grid.values()[i] = std::clamp(sig(lg.heatmap->value[i]), kEps, 1.0 - kEps);
  return {p_ift, grid};
}

size_t count_learnable_params(const GazeDecoder& dec, const EncoderAdapter& enc) {
  (void)enc;  // frozen: contributes no learnable parameters
  return dec.learnable_param_count();
}

DecoderConfig full_scale_decoder_config() {
  DecoderConfig c;
  c.token_grid = 32;  // 448 input, patch 14
  c.encoder_dim = 768;
  c.msf.fusion_channels = 256;
  c.heads = 8;
  c.mlp_ratio = 4;
  c.inout_hidden = 64;
  c.hm_c1 = 96;
  c.hm_c2 = 64;
  return c;
}

// ----------------------------------------------------------------- GazeModel

GazeModel::GazeModel(const EncoderConfig& ec, const DecoderConfig& dc)
    : encoder(ec), decoder(dc) {
  if (dc.token_grid != ec.tokens_per_side())
    throw ConfigError("GazeModel: decoder token_grid " +
                      std::to_string(dc.token_grid) +
                      " does not match encoder grid " +
                      std::to_string(ec.tokens_per_side()));
  if (dc.encoder_dim != ec.embed_dim)
    throw ConfigError("GazeModel: decoder encoder_dim does not match encoder");
}

std::string GazeModel::config_json() const {
  nlohmann::json j;
  j["encoder"] = nlohmann::json::parse(encoder.config().to_json());
  j["decoder"] = nlohmann::json::parse(decoder.config().to_json());
  return j.dump();
}

void GazeModel::save(const std::string& path, const std::string& stage) const {
  io::Checkpoint ck;
  ck.kind = "gaze";
  ck.stage = stage;
  ck.config_json = config_json();
  ck.param_count = decoder.learnable_param_count();
  for (const auto& [name, var] : decoder.named_params())
    ck.add("dec." + name, var->value, /*frozen=*/false);
  for (const auto& [name, t] : encoder.weights())
    ck.add("enc." + name, t, /*frozen=*/true);
  io::save_checkpoint(ck, path);
}

GazeModel GazeModel::load(const std::string& path) {
  const io::Checkpoint ck = io::load_checkpoint(path, "gaze");
  const auto j = nlohmann::json::parse(ck.config_json);
  GazeModel model(EncoderConfig::from_json(j.at("encoder").dump()),
                  DecoderConfig::from_json(j.at("decoder").dump()));
  for (const auto& [name, var] : model.decoder.named_params()) {
    const std::string key = "dec." + name;
    if (!ck.has(key))
      throw CheckpointError("gaze checkpoint: schema mismatch, missing tensor '" +
                            key + "'");
    const Tensor& t = ck.get(key);
    if (!t.same_shape(var->value))
      throw CheckpointError("gaze checkpoint: schema mismatch at tensor '" + key +
                            "': expected " + var->value.shape_str() + ", got " +
                            t.shape_str());
    var->value = t;
  }
  for (auto& [name, t] : model.encoder.weights_mutable()) {
    const std::string key = "enc." + name;
    if (!ck.has(key))
      throw CheckpointError("gaze checkpoint: schema mismatch, missing tensor '" +
                            key + "'");
    const Tensor& stored = ck.get(key);
    if (!stored.same_shape(t))
      throw CheckpointError("gaze checkpoint: schema mismatch at tensor '" + key +
                            "': expected " + t.shape_str() + ", got " +
                            stored.shape_str());
    t = stored;
  }
  return model;
}

}  // namespace gt360::gazenet
