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

#include "g2p/model.h"

#include <cmath>
#include <stdexcept>

#include "g2p/error.h"

namespace g2p {

int64_t expected_parameter_count(const TransformerConfig& cfg) {
  int64_t d = cfg.d_model;
  int64_t f = cfg.d_ff;
  int64_t linear_dd = d * d + d;
  int64_t mha = 4 * linear_dd;
  int64_t ln = 2 * d;
  int64_t ff = (d * f + f) + (f * d + d);
  int64_t enc_layer = mha + ff + 2 * ln;
  int64_t dec_layer = 2 * mha + ff + 3 * ln;
  int64_t embeddings =
      cfg.source_vocab_size * d + cfg.target_vocab_size * d;
  int64_t head = d * cfg.target_vocab_size + cfg.target_vocab_size;
  return cfg.n_encoder_layers * enc_layer + cfg.n_decoder_layers * dec_layer +
         embeddings + head;
}

template <typename T>
Tensor<T> sinusoidal_positions(int64_t max_len, int64_t d_model) {
  Tensor<T> pe({max_len, d_model});
  for (int64_t pos = 0; pos < max_len; ++pos) {
    for (int64_t i = 0; 2 * i < d_model; ++i) {
      double angle =
          pos / std::pow(10000.0, (2.0 * static_cast<double>(i)) /
                                      static_cast<double>(d_model));
      pe.at(pos, 2 * i) = static_cast<T>(std::sin(angle));
      if (2 * i + 1 < d_model) {
        pe.at(pos, 2 * i + 1) = static_cast<T>(std::cos(angle));
      }
    }
  }
  return pe;
}

// ---------------------------------------------------------------------------
// EncoderLayer

template <typename T>
EncoderLayer<T>::EncoderLayer(const std::string& name, int64_t d_model,
                              int64_t d_ff, int64_t n_heads, double dropout)
    : self_attn(name + ".self_attn", d_model, n_heads),
      ln1(name + ".ln1", d_model),
      ff(name + ".ff", d_model, d_ff),
      ln2(name + ".ln2", d_model),
      drop1(dropout),
      drop2(dropout) {}

template <typename T>
Tensor<T> EncoderLayer<T>::forward(const Tensor<T>& x,
                                   const Tensor<uint8_t>& mask, bool training,
                                   Rng& rng) {
  Tensor<T> a = self_attn.forward(x, x, mask);
  a = drop1.forward(a, training, rng);
  add_into(a, x);
  Tensor<T> h = ln1.forward(a);

  Tensor<T> f = ff.forward(h);
  f = drop2.forward(f, training, rng);
  add_into(f, h);
  return ln2.forward(f);
}

template <typename T>
Tensor<T> EncoderLayer<T>::backward(const Tensor<T>& dy) {
  Tensor<T> d_sum2 = ln2.backward(dy);
  Tensor<T> d_f = drop2.backward(d_sum2);
  Tensor<T> d_h = ff.backward(d_f);
  add_into(d_h, d_sum2);

  Tensor<T> d_sum1 = ln1.backward(d_h);
  Tensor<T> d_a = drop1.backward(d_sum1);
  auto [dq, dkv] = self_attn.backward(d_a);
  Tensor<T> dx = std::move(d_sum1);
  add_into(dx, dq);
  add_into(dx, dkv);
  return dx;
}

template <typename T>
void EncoderLayer<T>::collect(std::vector<Parameter<T>*>& out) {
  self_attn.collect(out);
  ln1.collect(out);
  ff.collect(out);
  ln2.collect(out);
}

template <typename T>
void EncoderLayer<T>::init_xavier(Rng& rng) {
  self_attn.init_xavier(rng);
  ff.init_xavier(rng);
}

// ---------------------------------------------------------------------------
// DecoderLayer

template <typename T>
DecoderLayer<T>::DecoderLayer(const std::string& name, int64_t d_model,
                              int64_t d_ff, int64_t n_heads, double dropout)
    : self_attn(name + ".self_attn", d_model, n_heads),
      ln1(name + ".ln1", d_model),
      cross_attn(name + ".cross_attn", d_model, n_heads),
      ln2(name + ".ln2", d_model),
      ff(name + ".ff", d_model, d_ff),
      ln3(name + ".ln3", d_model),
      drop1(dropout),
      drop2(dropout),
      drop3(dropout) {}

template <typename T>
Tensor<T> DecoderLayer<T>::forward(const Tensor<T>& y, const Tensor<T>& memory,
                                   const Tensor<uint8_t>& self_mask,
                                   const Tensor<uint8_t>& cross_mask,
                                   bool training, Rng& rng) {
  Tensor<T> a = self_attn.forward(y, y, self_mask);
  a = drop1.forward(a, training, rng);
  add_into(a, y);
  Tensor<T> h1 = ln1.forward(a);

  Tensor<T> c = cross_attn.forward(h1, memory, cross_mask);
  c = drop2.forward(c, training, rng);
  add_into(c, h1);
  Tensor<T> h2 = ln2.forward(c);

  Tensor<T> f = ff.forward(h2);
  f = drop3.forward(f, training, rng);
  add_into(f, h2);
  return ln3.forward(f);
}

template <typename T>
Tensor<T> DecoderLayer<T>::backward(const Tensor<T>& dy, Tensor<T>& d_memory) {
  Tensor<T> d_sum3 = ln3.backward(dy);
  Tensor<T> d_f = drop3.backward(d_sum3);
  Tensor<T> d_h2 = ff.backward(d_f);
  add_into(d_h2, d_sum3);

  Tensor<T> d_sum2 = ln2.backward(d_h2);
  Tensor<T> d_c = drop2.backward(d_sum2);
  auto [d_h1, d_mem] = cross_attn.backward(d_c);
  add_into(d_memory, d_mem);
  add_into(d_h1, d_sum2);

  Tensor<T> d_sum1 = ln1.backward(d_h1);
  Tensor<T> d_a = drop1.backward(d_sum1);
  auto [dq, dkv] = self_attn.backward(d_a);
  Tensor<T> d_in = std::move(d_sum1);
  add_into(d_in, dq);
  add_into(d_in, dkv);
  return d_in;
}

template <typename T>
void DecoderLayer<T>::collect(std::vector<Parameter<T>*>& out) {
  self_attn.collect(out);
  ln1.collect(out);
  cross_attn.collect(out);
  ln2.collect(out);
  ff.collect(out);
  ln3.collect(out);
}

template <typename T>
void DecoderLayer<T>::init_xavier(Rng& rng) {
  self_attn.init_xavier(rng);
  cross_attn.init_xavier(rng);
  ff.init_xavier(rng);
}

// ---------------------------------------------------------------------------
// TransformerModel

template <typename T>
TransformerModel<T>::TransformerModel(TransformerConfig cfg, uint64_t init_seed)
    : cfg_(cfg) {
  if (cfg_.source_vocab_size < 4 || cfg_.target_vocab_size < 4) {
    throw std::invalid_argument("vocabulary must include the four specials");
  }
  if (cfg_.n_encoder_layers < 1 || cfg_.n_decoder_layers < 1 ||
      cfg_.max_seq_len < 2) {
    throw std::invalid_argument("degenerate transformer config");
  }

  source_embedding_ =
      Embedding<T>("source_embedding", cfg_.source_vocab_size, cfg_.d_model);
  target_embedding_ =
      Embedding<T>("target_embedding", cfg_.target_vocab_size, cfg_.d_model);
  positions_ = sinusoidal_positions<T>(cfg_.max_seq_len, cfg_.d_model);
  for (int64_t i = 0; i < cfg_.n_encoder_layers; ++i) {
    encoder_.emplace_back("encoder." + std::to_string(i), cfg_.d_model,
                          cfg_.d_ff, cfg_.n_heads, cfg_.dropout);
  }
  for (int64_t i = 0; i < cfg_.n_decoder_layers; ++i) {
    decoder_.emplace_back("decoder." + std::to_string(i), cfg_.d_model,
                          cfg_.d_ff, cfg_.n_heads, cfg_.dropout);
  }
  output_projection_ =
      Linear<T>("output_projection", cfg_.d_model, cfg_.target_vocab_size);
  source_dropout_ = Dropout<T>(cfg_.dropout);
  target_dropout_ = Dropout<T>(cfg_.dropout);

  Rng init_rng = Rng::substream(init_seed, 0);
  source_embedding_.init_xavier(init_rng);
  target_embedding_.init_xavier(init_rng);
  for (auto& layer : encoder_) layer.init_xavier(init_rng);
  for (auto& layer : decoder_) layer.init_xavier(init_rng);
  output_projection_.init_xavier(init_rng);

  dropout_rng_ = Rng::substream(init_seed, 1);
}

template <typename T>
std::vector<Parameter<T>*> TransformerModel<T>::parameters() {
  std::vector<Parameter<T>*> out;
  source_embedding_.collect(out);
  target_embedding_.collect(out);
  for (auto& layer : encoder_) layer.collect(out);
  for (auto& layer : decoder_) layer.collect(out);
  output_projection_.collect(out);
  return out;
}

template <typename T>
int64_t TransformerModel<T>::count_parameters() {
  int64_t n = 0;
  for (const Parameter<T>* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
void TransformerModel<T>::seed_dropout(uint64_t seed) {
  dropout_rng_ = Rng(seed);
}

template <typename T>
Tensor<T> TransformerModel<T>::encode(std::span<const int32_t> source_ids,
                                      const Tensor<uint8_t>& enc_mask,
                                      int64_t batch, int64_t src_len,
                                      bool training) {
  if (src_len > cfg_.max_seq_len) {
    throw DataError("source length " + std::to_string(src_len) +
                    " exceeds the position table (" +
                    std::to_string(cfg_.max_seq_len) + ")");
  }
  Tensor<T> x = source_embedding_.forward(source_ids);
  T scale = static_cast<T>(std::sqrt(static_cast<double>(cfg_.d_model)));
  for (int64_t i = 0; i < x.size(); ++i) x[i] *= scale;
  x.reshape({batch, src_len, cfg_.d_model});
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t l = 0; l < src_len; ++l) {
      for (int64_t j = 0; j < cfg_.d_model; ++j) {
        x.at(b, l, j) += positions_.at(l, j);
      }
    }
  }
  x = source_dropout_.forward(x, training, dropout_rng_);
  for (auto& layer : encoder_) {
    x = layer.forward(x, enc_mask, training, dropout_rng_);
  }
  return x;
}

template <typename T>
Tensor<T> TransformerModel<T>::decode_logits(
    const Tensor<T>& memory, std::span<const int32_t> target_in_ids,
    const Tensor<uint8_t>& self_mask, const Tensor<uint8_t>& cross_mask,
    int64_t batch, int64_t tgt_len, bool training) {
  if (tgt_len > cfg_.max_seq_len) {
    throw DataError("target length " + std::to_string(tgt_len) +
                    " exceeds the position table (" +
                    std::to_string(cfg_.max_seq_len) + ")");
  }
  Tensor<T> y = target_embedding_.forward(target_in_ids);
  T scale = static_cast<T>(std::sqrt(static_cast<double>(cfg_.d_model)));
  for (int64_t i = 0; i < y.size(); ++i) y[i] *= scale;
  y.reshape({batch, tgt_len, cfg_.d_model});
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t l = 0; l < tgt_len; ++l) {
      for (int64_t j = 0; j < cfg_.d_model; ++j) {
        y.at(b, l, j) += positions_.at(l, j);
      }
    }
  }
  y = target_dropout_.forward(y, training, dropout_rng_);
  for (auto& layer : decoder_) {
    y = layer.forward(y, memory, self_mask, cross_mask, training, dropout_rng_);
  }
  return output_projection_.forward(y);
}

template <typename T>
LossStats TransformerModel<T>::batch_loss(const Batch& batch, bool training,
                                          bool backprop) {
  int64_t b = batch.size;
  int64_t ls = batch.src_len;
  int64_t lt = batch.tgt_len;
  if (b < 1) throw DataError("empty batch");
  if (lt < 2) throw DataError("target sequences need at least two tokens");
  int64_t li = lt - 1;

  Tensor<uint8_t> enc_mask({b, ls, ls});
  Tensor<uint8_t> self_mask({b, li, li});
  Tensor<uint8_t> cross_mask({b, li, ls});
  for (int64_t bb = 0; bb < b; ++bb) {
    for (int64_t i = 0; i < ls; ++i) {
      for (int64_t j = 0; j < ls; ++j) {
        enc_mask.at(bb, i, j) = batch.source_mask[static_cast<size_t>(bb * ls + j)];
      }
    }
    for (int64_t i = 0; i < li; ++i) {
      for (int64_t j = 0; j < li; ++j) {
        self_mask.at(bb, i, j) =
            (j <= i) && batch.target_mask[static_cast<size_t>(bb * lt + j)];
      }
      for (int64_t j = 0; j < ls; ++j) {
        cross_mask.at(bb, i, j) =
            batch.source_mask[static_cast<size_t>(bb * ls + j)];
      }
    }
  }

  std::vector<int32_t> target_in(static_cast<size_t>(b * li));
  std::vector<int32_t> labels(static_cast<size_t>(b * li));
  for (int64_t bb = 0; bb < b; ++bb) {
    for (int64_t t = 0; t < li; ++t) {
      target_in[static_cast<size_t>(bb * li + t)] =
          batch.target_ids[static_cast<size_t>(bb * lt + t)];
      labels[static_cast<size_t>(bb * li + t)] =
          batch.target_ids[static_cast<size_t>(bb * lt + t + 1)];
    }
  }

  Tensor<T> memory = encode(batch.source_ids, enc_mask, b, ls, training);
  Tensor<T> logits = decode_logits(memory, target_in, self_mask, cross_mask, b,
                                   li, training);
  logits.reshape({b * li, cfg_.target_vocab_size});
  CrossEntropyResult<T> ce =
      cross_entropy<T>(logits, labels, Vocabulary::kPad);

  if (backprop) {
    T scale = static_cast<T>(std::sqrt(static_cast<double>(cfg_.d_model)));

    Tensor<T> dy = output_projection_.backward(ce.dlogits);
    dy.reshape({b, li, cfg_.d_model});
    Tensor<T> d_memory({b, ls, cfg_.d_model});
    for (auto it = decoder_.rbegin(); it != decoder_.rend(); ++it) {
      dy = it->backward(dy, d_memory);
    }
    dy = target_dropout_.backward(dy);
    for (int64_t i = 0; i < dy.size(); ++i) dy[i] *= scale;
    dy.reshape({b * li, cfg_.d_model});
    target_embedding_.backward(dy);

    Tensor<T> dx = std::move(d_memory);
    for (auto it = encoder_.rbegin(); it != encoder_.rend(); ++it) {
      dx = it->backward(dx);
    }
    dx = source_dropout_.backward(dx);
    for (int64_t i = 0; i < dx.size(); ++i) dx[i] *= scale;
    dx.reshape({b * ls, cfg_.d_model});
    source_embedding_.backward(dx);
  }

  return {ce.loss, ce.tokens};
}

template <typename T>
DecodeResult TransformerModel<T>::greedy_decode(
    std::span<const int32_t> source_ids, int64_t max_len) {
  if (max_len <= 0) max_len = cfg_.max_seq_len;
  int64_t ls = static_cast<int64_t>(source_ids.size());
  if (ls < 1) throw DataError("cannot decode an empty source sequence");

  Tensor<uint8_t> enc_mask({1, ls, ls}, 1);
  Tensor<T> memory = encode(source_ids, enc_mask, 1, ls, false);

  std::vector<int32_t> prefix = {Vocabulary::kBos};
  DecodeResult res;
  while (true) {
    int64_t li = static_cast<int64_t>(prefix.size());
    Tensor<uint8_t> self_mask({1, li, li});
    for (int64_t i = 0; i < li; ++i) {
      for (int64_t j = 0; j <= i; ++j) self_mask.at(0, i, j) = 1;
    }
    Tensor<uint8_t> cross_mask({1, li, ls}, 1);
    Tensor<T> logits =
        decode_logits(memory, prefix, self_mask, cross_mask, 1, li, false);

    const T* row = logits.data() + (li - 1) * cfg_.target_vocab_size;
    int32_t best = 0;
    T best_value = row[0];
    for (int64_t j = 1; j < cfg_.target_vocab_size; ++j) {
      if (row[j] > best_value) {
        best = static_cast<int32_t>(j);
        best_value = row[j];
      }
    }
    if (best == Vocabulary::kEos) break;
    res.ids.push_back(best);
    prefix.push_back(best);
    if (static_cast<int64_t>(prefix.size()) >= max_len) {
      res.truncated = true;
      break;
    }
  }
  return res;
}

template <typename T>
void TransformerModel<T>::reset_target_head(int64_t new_target_vocab_size,
                                            Rng& rng) {
  if (new_target_vocab_size < 4) {
    throw std::invalid_argument("vocabulary must include the four specials");
  }
  target_embedding_ =
      Embedding<T>("target_embedding", new_target_vocab_size, cfg_.d_model);
  target_embedding_.init_xavier(rng);
  output_projection_ =
      Linear<T>("output_projection", cfg_.d_model, new_target_vocab_size);
  output_projection_.init_xavier(rng);
  cfg_.target_vocab_size = new_target_vocab_size;
}

// ---------------------------------------------------------------------------

template Tensor<float> sinusoidal_positions<float>(int64_t, int64_t);
template Tensor<double> sinusoidal_positions<double>(int64_t, int64_t);
template struct EncoderLayer<float>;
template struct EncoderLayer<double>;
template struct DecoderLayer<float>;
template struct DecoderLayer<double>;
template class TransformerModel<float>;
template class TransformerModel<double>;

}  // namespace g2p
