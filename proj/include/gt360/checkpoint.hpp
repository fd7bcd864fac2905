// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_CHECKPOINT_HPP
#define GT360_CHECKPOINT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gt360/tensor.hpp"

namespace gt360::io {

// Single-file tensor container:
//
//   bytes 0..7   magic "GT360CK1"
//   bytes 8..11  little-endian u32 header length
//   header       JSON: kind, stage, config (canonical), config_hash,
//                param_count, tensors: [{name, shape, frozen, offset}]
//   payload      raw little-endian doubles, in tensor order
//
// config_hash is FNV-1a/64 over the canonical (key-sorted) config JSON, so a
// checkpoint can only be loaded into a model built from the same config.
struct Checkpoint {
  std::string kind;    // "gaze" | "ec"
  std::string stage;   // "init" | "pretrain" | "finetune"
  std::string config_json;  // canonical model config
  uint64_t param_count = 0; // learnable only (frozen tensors excluded)

  struct Entry {
    std::string name;
    nn::Tensor tensor;
    bool frozen = false;
  };
  std::vector<Entry> tensors;

  void add(const std::string& name, const nn::Tensor& t, bool frozen = false);
  const nn::Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

uint64_t fnv1a64(const std::string& bytes);

void save_checkpoint(const Checkpoint& ck, const std::string& path);

// Throws CheckpointError on malformed files, config-hash mismatch (when
// expected_config_json is nonempty), or kind mismatch (when expected_kind is
// nonempty). Tensor-shape validation against a model happens at restore time
// and names the offending tensor.
Checkpoint load_checkpoint(const std::string& path,
                           const std::string& expected_kind = "",
                           const std::string& expected_config_json = "");

}  // namespace gt360::io

#endif  // GT360_CHECKPOINT_HPP
