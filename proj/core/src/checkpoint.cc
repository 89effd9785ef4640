// Copyright (c) 2026 The g2p Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "g2p/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <unordered_map>

#include "g2p/error.h"
#include "src/io_util.h"

namespace g2p {

namespace {

constexpr std::array<char, 4> kMagic = {'G', '2', 'P', 'C'};
constexpr int64_t kMaxRank = 8;

constexpr std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int bit = 0; bit < 8; ++bit) {
      c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
    }
    table[i] = c;
  }
  return table;
}

constexpr std::array<uint32_t, 256> kCrcTable = make_crc_table();

void append_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_i64(std::string& out, int64_t v) {
  uint64_t u = static_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

void append_f32(std::string& out, float v) {
  append_u32(out, std::bit_cast<uint32_t>(v));
}

void append_string(std::string& out, std::string_view s) {
  append_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

// Bounds-checked cursor; running past the end means the file was cut short.
struct Reader {
  const uint8_t* data;
  size_t size;
  size_t off = 0;

  void need(size_t n) const {
    if (off + n > size) {
      throw CheckpointError(CheckpointError::Reason::kTruncated,
                            "checkpoint ends mid-record");
    }
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[off + i]) << (8 * i);
    off += 4;
    return v;
  }

  int64_t i64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data[off + i]) << (8 * i);
    off += 8;
    return static_cast<int64_t>(v);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string str() {
    uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data + off), n);
    off += n;
    return s;
  }
};

void malformed(const std::string& what) {
  throw CheckpointError(CheckpointError::Reason::kMalformed, what);
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int64_t v = std::stoll(value, &used);
    if (used != value.size()) malformed("bad integer for " + key);
    return v;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception&) {
    malformed("bad integer for " + key);
  }
  return 0;
}

double parse_float(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) malformed("bad number for " + key);
    return v;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception&) {
    malformed("bad number for " + key);
  }
  return 0;
}

std::vector<std::pair<std::string, std::string>> config_entries(
    const TransformerConfig& c) {
  return {
      {"config.n_encoder_layers", std::to_string(c.n_encoder_layers)},
      {"config.n_decoder_layers", std::to_string(c.n_decoder_layers)},
      {"config.d_model", std::to_string(c.d_model)},
      {"config.d_ff", std::to_string(c.d_ff)},
      {"config.n_heads", std::to_string(c.n_heads)},
      {"config.dropout", format_double(c.dropout)},
      {"config.max_seq_len", std::to_string(c.max_seq_len)},
      {"config.source_vocab_size", std::to_string(c.source_vocab_size)},
      {"config.target_vocab_size", std::to_string(c.target_vocab_size)},
  };
}

void append_vocab(std::string& out, const Vocabulary& vocab) {
  append_u32(out, static_cast<uint32_t>(vocab.size()));
  for (const std::string& t : vocab.tokens()) append_string(out, t);
}

Vocabulary read_vocab(Reader& r) {
  uint32_t n = r.u32();
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (uint32_t i = 0; i < n; ++i) tokens.push_back(r.str());
  try {
    return Vocabulary::from_tokens(std::move(tokens));
  } catch (const DataError& e) {
    malformed(e.what());
  }
  return {};
}

}  // namespace

uint32_t crc32(const void* data, size_t size) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < size; ++i) {
    c = kCrcTable[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

const std::string* Checkpoint::find_metadata(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Checkpoint::set_metadata(std::string_view key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(std::string(key), std::move(value));
}

Checkpoint snapshot_model(TransformerModel<float>& model,
                          const Vocabulary& source_vocab,
                          const Vocabulary& target_vocab) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.source_vocab = source_vocab;
  ckpt.target_vocab = target_vocab;
  for (const Parameter<float>* p : model.parameters()) {
    ckpt.tensors.emplace_back(p->name, p->value);
  }
  return ckpt;
}

TransformerModel<float> model_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.config.source_vocab_size != ckpt.source_vocab.size() ||
      ckpt.config.target_vocab_size != ckpt.target_vocab.size()) {
    malformed("config vocab sizes disagree with vocab blocks");
  }

  TransformerModel<float> model(ckpt.config, 0);
  std::unordered_map<std::string, const Tensor<float>*> by_name;
  for (const auto& [name, tensor] : ckpt.tensors) {
    if (!by_name.emplace(name, &tensor).second) {
      malformed("duplicate parameter: " + name);
    }
  }

  std::vector<Parameter<float>*> params = model.parameters();
  if (params.size() != by_name.size()) {
    malformed("checkpoint holds " + std::to_string(by_name.size()) +
              " tensors, model needs " + std::to_string(params.size()));
  }
  for (Parameter<float>* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) malformed("missing parameter: " + p->name);
    if (it->second->shape() != p->value.shape()) {
      malformed("shape mismatch for " + p->name);
    }
    p->value = *it->second;
  }
  return model;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out;
  out.append(kMagic.data(), kMagic.size());
  append_u32(out, ckpt.version);

  std::vector<std::pair<std::string, std::string>> meta =
      config_entries(ckpt.config);
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.rfind("config.", 0) == 0) continue;
    meta.emplace_back(k, v);
  }
  append_u32(out, static_cast<uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) append_string(out, k + "=" + v);

  append_vocab(out, ckpt.source_vocab);
  append_vocab(out, ckpt.target_vocab);

  append_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    append_string(out, name);
    append_u32(out, static_cast<uint32_t>(tensor.rank()));
    for (int64_t d : tensor.shape()) append_i64(out, d);
    for (int64_t i = 0; i < tensor.size(); ++i) append_f32(out, tensor[i]);
  }

  append_u32(out, crc32(out.data(), out.size()));
  return out;
}

Checkpoint parse_checkpoint(const void* data, size_t size) {
  const uint8_t* bytes = static_cast<const uint8_t*>(data);
  if (size < kMagic.size() + 8) {
    throw CheckpointError(CheckpointError::Reason::kTruncated,
                          "file too small for a checkpoint");
  }
  if (std::memcmp(bytes, kMagic.data(), kMagic.size()) != 0) {
    throw CheckpointError(CheckpointError::Reason::kMagic,
                          "not a checkpoint file");
  }

  Reader r{bytes, size - 4, kMagic.size()};
  uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Reason::kVersion,
                          "unsupported checkpoint version " +
                              std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.version = version;

  uint32_t n_meta = r.u32();
  std::unordered_map<std::string, std::string> config_kv;
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string line = r.str();
    size_t eq = line.find('=');
    if (eq == std::string::npos) malformed("metadata line without '='");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key.rfind("config.", 0) == 0) {
      if (!config_kv.emplace(key, value).second) {
        malformed("duplicate metadata key " + key);
      }
    } else {
      ckpt.metadata.emplace_back(std::move(key), std::move(value));
    }
  }
  auto want = [&config_kv](const std::string& key) -> const std::string& {
    auto it = config_kv.find(key);
    if (it == config_kv.end()) malformed("missing metadata key " + key);
    return it->second;
  };
  TransformerConfig& c = ckpt.config;
  c.n_encoder_layers = parse_int("config.n_encoder_layers", want("config.n_encoder_layers"));
  c.n_decoder_layers = parse_int("config.n_decoder_layers", want("config.n_decoder_layers"));
  c.d_model = parse_int("config.d_model", want("config.d_model"));
  c.d_ff = parse_int("config.d_ff", want("config.d_ff"));
  c.n_heads = parse_int("config.n_heads", want("config.n_heads"));
  c.dropout = parse_float("config.dropout", want("config.dropout"));
  c.max_seq_len = parse_int("config.max_seq_len", want("config.max_seq_len"));
  c.source_vocab_size = parse_int("config.source_vocab_size", want("config.source_vocab_size"));
  c.target_vocab_size = parse_int("config.target_vocab_size", want("config.target_vocab_size"));

  ckpt.source_vocab = read_vocab(r);
  ckpt.target_vocab = read_vocab(r);
  if (ckpt.source_vocab.size() != c.source_vocab_size ||
      ckpt.target_vocab.size() != c.target_vocab_size) {
    malformed("vocab block size disagrees with config");
  }

  uint32_t n_tensors = r.u32();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    if (name.empty()) malformed("empty parameter name");
    uint32_t rank = r.u32();
    if (rank > kMaxRank) malformed("implausible tensor rank for " + name);
    std::vector<int64_t> shape;
    int64_t count = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      int64_t dim = r.i64();
      if (dim < 0 || dim > (1LL << 32)) malformed("bad dimension for " + name);
      shape.push_back(dim);
      count *= dim;
      if (count > (1LL << 40)) malformed("implausible tensor size for " + name);
    }
    r.need(static_cast<size_t>(count) * 4);
    Tensor<float> t(std::move(shape));
    for (int64_t e = 0; e < count; ++e) t[e] = r.f32();
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }

  if (r.off != r.size) malformed("trailing bytes before checksum");

  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<uint32_t>(bytes[size - 4 + i]) << (8 * i);
  }
  if (crc32(bytes, size - 4) != stored) {
    throw CheckpointError(CheckpointError::Reason::kChecksum,
                          "checkpoint checksum mismatch");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  return parse_checkpoint(bytes.data(), bytes.size());
}

}  // namespace g2p
