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

#ifndef G2P_CHECKPOINT_H_
#define G2P_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "g2p/corpus.h"
#include "g2p/model.h"
#include "g2p/tensor.h"

namespace g2p {

inline constexpr uint32_t kCheckpointVersion = 1;

// CRC-32 (reflected, polynomial 0xEDB88320), as used by zip and PNG.
uint32_t crc32(const void* data, size_t size);

// Serialized model state. File layout: magic "G2PC", u32 version, metadata
// block (length-prefixed key=value lines; config fields are stored under
// reserved config.* keys), source and target vocab blocks, named parameter
// records (name, rank, dims, row-major little-endian f32), trailing CRC-32
// of all preceding bytes. All integers are little-endian.
struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  TransformerConfig config;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  const std::string* find_metadata(std::string_view key) const;
  void set_metadata(std::string_view key, std::string value);
};

// Copies the model's parameters (canonical order) into a checkpoint.
Checkpoint snapshot_model(TransformerModel<float>& model,
                          const Vocabulary& source_vocab,
                          const Vocabulary& target_vocab);

// Rebuilds a model from a checkpoint; throws CheckpointError (kMalformed)
// when the tensor set does not match the config's parameter set exactly.
TransformerModel<float> model_from_checkpoint(const Checkpoint& ckpt);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const void* data, size_t size);

// Atomic write (temp file + rename).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace g2p

#endif  // G2P_CHECKPOINT_H_
