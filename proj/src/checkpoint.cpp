// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace gt360::io {

using nlohmann::json;

void Checkpoint::add(const std::string& name, const nn::Tensor& t, bool frozen) {
  tensors.push_back({name, t, frozen});
}

const nn::Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& e : tensors)
    if (e.name == name) return e.tensor;
  throw CheckpointError("checkpoint: missing tensor '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& e : tensors)
    if (e.name == name) return true;
  return false;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
constexpr char kMagic[8] = {'G', 'T', '3', '6', '0', 'C', 'K', '1'};

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}
}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json header;
  header["format"] = 1;
  header["kind"] = ck.kind;
  header["stage"] = ck.stage;
  header["config"] = json::parse(ck.config_json.empty() ? "{}" : ck.config_json);
  header["config_hash"] = hash_hex(fnv1a64(ck.config_json));
  header["param_count"] = ck.param_count;

  json tensors = json::array();
  uint64_t offset = 0;
  for (const auto& e : ck.tensors) {
    json t;
    t["name"] = e.name;
    t["shape"] = e.tensor.shape();
    t["frozen"] = e.frozen;
    t["offset"] = offset;
    tensors.push_back(t);
    offset += e.tensor.size() * sizeof(double);
  }
  header["tensors"] = tensors;

  const std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open for writing: " + path);
  out.write(kMagic, 8);
  const uint32_t len = static_cast<uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& e : ck.tensors)
    out.write(reinterpret_cast<const char*>(e.tensor.data()),
              static_cast<std::streamsize>(e.tensor.size() * sizeof(double)));
  if (!out) throw CheckpointError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path,
                           const std::string& expected_kind,
                           const std::string& expected_config_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError("checkpoint: bad magic in " + path);
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (in.gcount() != 4) throw CheckpointError("checkpoint: truncated header length");
  std::string hs(len, '\0');
  in.read(hs.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw CheckpointError("checkpoint: truncated header");

  json header;
  try {
    header = json::parse(hs);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: invalid header JSON: ") + e.what());
  }
  if (header.value("format", 0) != 1)
    throw CheckpointError("checkpoint: unsupported format version");

  Checkpoint ck;
  ck.kind = header.value("kind", "");
  ck.stage = header.value("stage", "");
  ck.config_json = header.at("config").dump();
  ck.param_count = header.value("param_count", uint64_t{0});

  if (!expected_kind.empty() && ck.kind != expected_kind)
    throw CheckpointError("checkpoint: kind mismatch, expected '" + expected_kind +
                          "', got '" + ck.kind + "'");
  const std::string stored_hash = header.value("config_hash", "");
  if (hash_hex(fnv1a64(ck.config_json)) != stored_hash)
    throw CheckpointError("checkpoint: header corrupted (config hash mismatch)");
  if (!expected_config_json.empty()) {
    const std::string want = hash_hex(fnv1a64(expected_config_json));
    if (want != stored_hash)
      throw CheckpointError(
          "checkpoint: config hash mismatch; the file was written for a "
          "different model configuration (expected " + want + ", got " +
          stored_hash + ")");
  }

  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const std::vector<int> shape = t.at("shape").get<std::vector<int>>();
    nn::Tensor tensor(shape);
    in.read(reinterpret_cast<char*>(tensor.data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(tensor.size() * sizeof(double)))
      throw CheckpointError("checkpoint: truncated payload at tensor '" + name + "'");
    ck.tensors.push_back({name, std::move(tensor), t.value("frozen", false)});
  }
  return ck;
}

}  // namespace gt360::io
