// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "gt360/checkpoint.hpp"
#include "gt360/eyecontact.hpp"
#include "gt360/gazenet.hpp"
#include "testutil.hpp"

using namespace gt360;

TEST_CASE("checkpoint round-trip with manifest") {
  testutil::TempDir tmp;
  io::Checkpoint ck;
  ck.kind = "gaze";
  ck.stage = "pretrain";
  ck.config_json = R"({"a":1})";
  ck.param_count = 6;
  Rng rng(3);
  ck.add("w", nn::Tensor::randn({2, 3}, rng));
  ck.add("frozen_t", nn::Tensor::randn({4}, rng), /*frozen=*/true);

  const std::string path = tmp.file("m.ck");
  io::save_checkpoint(ck, path);
  const io::Checkpoint back = io::load_checkpoint(path, "gaze", R"({"a":1})");
  CHECK(back.stage == "pretrain");
  CHECK(back.param_count == 6);
  CHECK(back.get("w").vec() == ck.get("w").vec());
  CHECK(back.tensors[1].frozen);
}

TEST_CASE("checkpoint rejects kind and config-hash mismatches") {
  testutil::TempDir tmp;
  io::Checkpoint ck;
  ck.kind = "ec";
  ck.config_json = R"({"a":1})";
  ck.add("w", nn::Tensor({2}));
  const std::string path = tmp.file("m.ck");
  io::save_checkpoint(ck, path);

  CHECK_THROWS_AS(io::load_checkpoint(path, "gaze"), CheckpointError);
  CHECK_THROWS_AS(io::load_checkpoint(path, "ec", R"({"a":2})"), CheckpointError);
  CHECK_NOTHROW(io::load_checkpoint(path, "ec", R"({"a":1})"));
}

TEST_CASE("checkpoint rejects corrupt files") {
  testutil::TempDir tmp;
  const std::string path = tmp.file("bad.ck");
  testutil::write_file(path, "GT360CK1garbage");
  CHECK_THROWS_AS(io::load_checkpoint(path), CheckpointError);
  testutil::write_file(path, "NOTMAGIC");
  CHECK_THROWS_AS(io::load_checkpoint(path), CheckpointError);
  CHECK_THROWS_AS(io::load_checkpoint(tmp.file("absent.ck")), CheckpointError);
}

TEST_CASE("ec model checkpoint round-trip and schema mismatch naming") {
  testutil::TempDir tmp;
  ec::EcConfig cfg;
  cfg.input_size = 32;
  cfg.c1 = 4;
  cfg.c2 = 4;
  cfg.c3 = 4;
  ec::EcModel model(cfg);
  const std::string path = tmp.file("ec.ck");
  model.save(path);

  ec::EcModel back = ec::EcModel::load(path);
  CHECK(back.config().input_size == 32);
  CHECK(back.param_count() == model.param_count());

  // A checkpoint whose weights disagree with its own config must be named
  // after the offending tensor.
  io::Checkpoint raw = io::load_checkpoint(path, "ec");
  raw.tensors[0].tensor = nn::Tensor({1, 1, 3, 4});  // conv1_w wrong shape
  const std::string bad = tmp.file("bad_ec.ck");
  io::save_checkpoint(raw, bad);
  try {
    ec::EcModel::load(bad);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("conv1_w") != std::string::npos);
  }
}

TEST_CASE("gaze model checkpoint restores weights bit-exactly") {
  testutil::TempDir tmp;
  gazenet::EncoderConfig ec;
  ec.input_size = 64;
  ec.patch_size = 16;
  ec.embed_dim = 16;
  ec.blocks = 1;
  gazenet::DecoderConfig dc;
  dc.token_grid = 4;
  dc.encoder_dim = 16;
  dc.msf.fusion_channels = 16;
  dc.heads = 2;
  dc.inout_hidden = 8;
  dc.hm_c1 = 4;
  dc.hm_c2 = 4;
  gazenet::GazeModel model(ec, dc);
  const std::string path = tmp.file("gaze.ck");
  model.save(path, "finetune");

  const gazenet::GazeModel back = gazenet::GazeModel::load(path);
  for (size_t i = 0; i < back.decoder.named_params().size(); ++i)
    CHECK(back.decoder.named_params()[i].second->value.vec() ==
          model.decoder.named_params()[i].second->value.vec());
  for (size_t i = 0; i < back.encoder.weights().size(); ++i)
    CHECK(back.encoder.weights()[i].second.vec() ==
          model.encoder.weights()[i].second.vec());
}
