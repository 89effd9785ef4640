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

#ifndef G2P_MODEL_H_
#define G2P_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "g2p/corpus.h"
#include "g2p/nn.h"
#include "g2p/rng.h"
#include "g2p/tensor.h"

namespace g2p {

struct TransformerConfig {
  int64_t n_encoder_layers = 3;
  int64_t n_decoder_layers = 3;
  int64_t d_model = 256;
  int64_t d_ff = 512;
  int64_t n_heads = 8;
  double dropout = 0.1;
  int64_t max_seq_len = kMaxSeqLen;
  int64_t source_vocab_size = 0;
  int64_t target_vocab_size = 0;

  bool operator==(const TransformerConfig&) const = default;
};

// Trainable parameter count implied by a config, in closed form.
int64_t expected_parameter_count(const TransformerConfig& cfg);

// Sinusoidal table [max_len, d_model]: row p holds
// sin(p / 10000^(2i/d)) in column 2i and the matching cos in column 2i+1,
// so row 0 is [0, 1, 0, 1, ...].
template <typename T>
Tensor<T> sinusoidal_positions(int64_t max_len, int64_t d_model);

struct LossStats {
  double loss = 0.0;   // mean over counted target positions
  int64_t tokens = 0;  // counted target positions
};

struct DecodeResult {
  std::vector<int32_t> ids;  // generated tokens, BOS and EOS stripped
  bool truncated = false;    // length cap reached before EOS
};

template <typename T>
struct EncoderLayer {
  MultiHeadAttention<T> self_attn;
  LayerNorm<T> ln1;
  FeedForward<T> ff;
  LayerNorm<T> ln2;
  Dropout<T> drop1;
  Dropout<T> drop2;

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, int64_t d_model, int64_t d_ff,
               int64_t n_heads, double dropout);

  Tensor<T> forward(const Tensor<T>& x, const Tensor<uint8_t>& mask,
                    bool training, Rng& rng);
  Tensor<T> backward(const Tensor<T>& dy);
  void collect(std::vector<Parameter<T>*>& out);
  void init_xavier(Rng& rng);
};

template <typename T>
struct DecoderLayer {
  MultiHeadAttention<T> self_attn;
  LayerNorm<T> ln1;
  MultiHeadAttention<T> cross_attn;
  LayerNorm<T> ln2;
  FeedForward<T> ff;
  LayerNorm<T> ln3;
  Dropout<T> drop1;
  Dropout<T> drop2;
  Dropout<T> drop3;

  DecoderLayer() = default;
  DecoderLayer(const std::string& name, int64_t d_model, int64_t d_ff,
               int64_t n_heads, double dropout);

  Tensor<T> forward(const Tensor<T>& y, const Tensor<T>& memory,
                    const Tensor<uint8_t>& self_mask,
                    const Tensor<uint8_t>& cross_mask, bool training, Rng& rng);
  // Returns d(y); adds the cross-attention contribution into d_memory.
  Tensor<T> backward(const Tensor<T>& dy, Tensor<T>& d_memory);
  void collect(std::vector<Parameter<T>*>& out);
  void init_xavier(Rng& rng);
};

// Post-norm encoder-decoder transformer trained with teacher forcing.
template <typename T>
class TransformerModel {
 public:
  TransformerModel(TransformerConfig cfg, uint64_t init_seed);

  const TransformerConfig& config() const { return cfg_; }

  // Canonical parameter order; checkpoints and optimizers rely on it.
  std::vector<Parameter<T>*> parameters();
  int64_t count_parameters();

  void seed_dropout(uint64_t seed);

  // Teacher-forced loss on one batch. `training` enables dropout;
  // `backprop` accumulates gradients into the parameters.
  LossStats batch_loss(const Batch& batch, bool training, bool backprop);

  // Greedy decode of one encoded source sequence (BOS/EOS included).
  // max_len <= 0 uses the config cap.
  DecodeResult greedy_decode(std::span<const int32_t> source_ids,
                             int64_t max_len = 0);

  // Swaps in a freshly initialized target embedding and output projection
  // for a new target vocabulary; everything else is left untouched.
  void reset_target_head(int64_t new_target_vocab_size, Rng& rng);

  // Test hooks.
  EncoderLayer<T>& encoder_layer(int64_t i) { return encoder_[static_cast<size_t>(i)]; }
  DecoderLayer<T>& decoder_layer(int64_t i) { return decoder_[static_cast<size_t>(i)]; }

 private:
  Tensor<T> encode(std::span<const int32_t> source_ids,
                   const Tensor<uint8_t>& enc_mask, int64_t batch,
                   int64_t src_len, bool training);
  Tensor<T> decode_logits(const Tensor<T>& memory,
                          std::span<const int32_t> target_in_ids,
                          const Tensor<uint8_t>& self_mask,
                          const Tensor<uint8_t>& cross_mask, int64_t batch,
                          int64_t tgt_len, bool training);

  TransformerConfig cfg_;
  Embedding<T> source_embedding_;
  Embedding<T> target_embedding_;
  Tensor<T> positions_;
  std::vector<EncoderLayer<T>> encoder_;
  std::vector<DecoderLayer<T>> decoder_;
  Linear<T> output_projection_;
  Dropout<T> source_dropout_;
  Dropout<T> target_dropout_;
  Rng dropout_rng_;
};

}  // namespace g2p

#endif  // G2P_MODEL_H_
