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

#ifndef G2P_NN_H_
#define G2P_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "g2p/rng.h"
#include "g2p/tensor.h"

namespace g2p {

// Named trainable tensor with an accumulated gradient of the same shape.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void init(std::string param_name, std::vector<int64_t> shape) {
    name = std::move(param_name);
    value = Tensor<T>(shape);
    grad = Tensor<T>(std::move(shape));
  }
};

template <typename T>
void zero_grads(const std::vector<Parameter<T>*>& params);

// Fills `w` with U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void xavier_uniform(Tensor<T>& w, int64_t fan_in, int64_t fan_out, Rng& rng);

// y = x W^T + b with W stored [out, in]. Input of any rank is treated as
// [rows, in]; the output keeps the leading dimensions.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int64_t in_features, int64_t out_features);

  void init_xavier(Rng& rng);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  void collect(std::vector<Parameter<T>*>& out);

  int64_t in_features() const { return in_; }
  int64_t out_features() const { return out_; }

 private:
  int64_t in_ = 0;
  int64_t out_ = 0;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> cached_input_;
};

// Normalizes the last dimension; gamma starts at one, beta at zero.
template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::string name, int64_t dim);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  int64_t dim_ = 0;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> cached_xhat_;
  std::vector<T> cached_inv_std_;
};

// Inverted dropout: surviving activations are scaled by 1/(1-p) at train
// time so inference needs no rescaling.
template <typename T>
class Dropout {
 public:
  Dropout() = default;
  explicit Dropout(double p);

  Tensor<T> forward(const Tensor<T>& x, bool training, Rng& rng);
  Tensor<T> backward(const Tensor<T>& dy) const;

  double p() const { return p_; }

 private:
  double p_ = 0.0;
  bool active_ = false;
  Tensor<T> cached_mask_;
};

// Row lookup table. forward() returns [n_ids, dim]; the caller reshapes.
template <typename T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::string name, int64_t vocab_size, int64_t dim);

  void init_xavier(Rng& rng);

  Tensor<T> forward(std::span<const int32_t> ids);
  void backward(const Tensor<T>& dy);

  Parameter<T>& weight() { return weight_; }
  void collect(std::vector<Parameter<T>*>& out);

  int64_t vocab_size() const { return vocab_size_; }
  int64_t dim() const { return dim_; }

 private:
  int64_t vocab_size_ = 0;
  int64_t dim_ = 0;
  Parameter<T> weight_;
  std::vector<int32_t> cached_ids_;
};

// Scaled dot-product attention over n_heads slices of d_model.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::string name, int64_t d_model, int64_t n_heads);

  void init_xavier(Rng& rng);

  // query [B, Lq, D], keyvalue [B, Lk, D], mask [B, Lq, Lk] where 1 means
  // the query position may attend to the key position. A query row whose
  // mask row is entirely zero raises NumericError.
  Tensor<T> forward(const Tensor<T>& query, const Tensor<T>& keyvalue,
                    const Tensor<uint8_t>& mask);

  // Returns (d_query, d_keyvalue). Self-attention callers pass the same
  // tensor as query and keyvalue and must sum the two gradients.
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& dy);

  // Softmax rows from the last forward call, [B, H, Lq, Lk].
  const Tensor<T>& attn_probs() const { return probs_; }

  void collect(std::vector<Parameter<T>*>& out);

 private:
  int64_t d_model_ = 0;
  int64_t n_heads_ = 0;
  int64_t d_k_ = 0;
  Linear<T> wq_, wk_, wv_, wo_;
  Tensor<T> q_, k_, v_;
  Tensor<T> probs_;
};

// Two-layer position-wise block with a ReLU between.
template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(std::string name, int64_t d_model, int64_t d_ff);

  void init_xavier(Rng& rng);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  Linear<T> fc1_;
  Linear<T> fc2_;
  Tensor<T> cached_pre_relu_;
};

template <typename T>
struct CrossEntropyResult {
  double loss = 0.0;   // mean over counted positions
  int64_t tokens = 0;  // positions with target != ignore_id
  Tensor<T> dlogits;   // gradient of the mean loss; ignored rows are zero
};

// Softmax cross entropy over logits [N, V] against integer targets [N].
// Throws DataError when every target equals ignore_id and NumericError when
// the loss is not finite.
template <typename T>
CrossEntropyResult<T> cross_entropy(const Tensor<T>& logits,
                                    std::span<const int32_t> targets,
                                    int32_t ignore_id);

// Global L2 gradient clipping. Returns the pre-clip norm; gradients are
// rescaled only when the norm exceeds max_norm.
template <typename T>
double clip_grad_norm(const std::vector<Parameter<T>*>& params,
                      double max_norm);

template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();
  int64_t steps() const { return t_; }

 private:
  std::vector<Parameter<T>*> params_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

}  // namespace g2p

#endif  // G2P_NN_H_
