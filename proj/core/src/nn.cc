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

#include "g2p/nn.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "g2p/error.h"
#include "src/eigen_util.h"

namespace g2p {

namespace {

// Shape with the last dimension swapped, for layers that map features.
std::vector<int64_t> with_last_dim(const std::vector<int64_t>& shape,
                                   int64_t last) {
  std::vector<int64_t> out = shape;
  out.back() = last;
  return out;
}

template <typename T>
int64_t feature_rows(const Tensor<T>& x, int64_t features, const char* who) {
  if (x.rank() < 1 || x.shape().back() != features) {
    throw std::invalid_argument(std::string(who) +
                                ": last dimension mismatch");
  }
  return x.size() / features;
}

}  // namespace

template <typename T>
void zero_grads(const std::vector<Parameter<T>*>& params) {
  for (Parameter<T>* p : params) p->grad.zero();
}

template <typename T>
void xavier_uniform(Tensor<T>& w, int64_t fan_in, int64_t fan_out, Rng& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (int64_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<T>(rng.uniform(-a, a));
  }
}

// ---------------------------------------------------------------------------
// Linear

template <typename T>
Linear<T>::Linear(std::string name, int64_t in_features, int64_t out_features)
    : in_(in_features), out_(out_features) {
  if (in_ < 1 || out_ < 1) throw std::invalid_argument("linear: bad shape");
  weight_.init(name + ".weight", {out_, in_});
  bias_.init(name + ".bias", {out_});
}

template <typename T>
void Linear<T>::init_xavier(Rng& rng) {
  xavier_uniform(weight_.value, in_, out_, rng);
  bias_.value.zero();
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
  int64_t rows = feature_rows(x, in_, "linear");
  cached_input_ = x;

  Tensor<T> y(with_last_dim(x.shape(), out_));
  ConstMatMap<T> xm(x.data(), rows, in_);
  ConstMatMap<T> wm(weight_.value.data(), out_, in_);
  MatMap<T> ym(y.data(), rows, out_);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += ConstRowVecMap<T>(bias_.value.data(), out_);
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& dy) {
  int64_t rows = feature_rows(dy, out_, "linear backward");
  ConstMatMap<T> dym(dy.data(), rows, out_);
  ConstMatMap<T> xm(cached_input_.data(), rows, in_);

  MatMap<T> dwm(weight_.grad.data(), out_, in_);
  dwm.noalias() += dym.transpose() * xm;
  RowVecMap<T>(bias_.grad.data(), out_) += dym.colwise().sum();

  Tensor<T> dx(cached_input_.shape());
  MatMap<T> dxm(dx.data(), rows, in_);
  ConstMatMap<T> wm(weight_.value.data(), out_, in_);
  dxm.noalias() = dym * wm;
  return dx;
}

template <typename T>
void Linear<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// LayerNorm

template <typename T>
LayerNorm<T>::LayerNorm(std::string name, int64_t dim) : dim_(dim) {
  if (dim_ < 1) throw std::invalid_argument("layernorm: bad dim");
  gamma_.init(name + ".gamma", {dim_});
  beta_.init(name + ".beta", {dim_});
  gamma_.value.fill(T{1});
}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) {
  int64_t rows = feature_rows(x, dim_, "layernorm");
  constexpr double kEps = 1e-5;

  cached_xhat_ = Tensor<T>(x.shape());
  cached_inv_std_.assign(static_cast<size_t>(rows), T{});
  Tensor<T> y(x.shape());

  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * dim_;
    double mean = 0;
    for (int64_t j = 0; j < dim_; ++j) mean += xr[j];
    mean /= static_cast<double>(dim_);
    double var = 0;
    for (int64_t j = 0; j < dim_; ++j) {
      double d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(dim_);
    T inv_std = static_cast<T>(1.0 / std::sqrt(var + kEps));
    cached_inv_std_[static_cast<size_t>(r)] = inv_std;
    for (int64_t j = 0; j < dim_; ++j) {
      T xhat = static_cast<T>((xr[j] - mean)) * inv_std;
      cached_xhat_[r * dim_ + j] = xhat;
      y[r * dim_ + j] = gamma_.value[j] * xhat + beta_.value[j];
    }
  }
  return y;
}

template <typename T>
Tensor<T> LayerNorm<T>::backward(const Tensor<T>& dy) {
  int64_t rows = feature_rows(dy, dim_, "layernorm backward");
  Tensor<T> dx(dy.shape());

  for (int64_t r = 0; r < rows; ++r) {
    const T* dyr = dy.data() + r * dim_;
    const T* xhr = cached_xhat_.data() + r * dim_;
    double sum_dxhat = 0;
    double sum_dxhat_xhat = 0;
    for (int64_t j = 0; j < dim_; ++j) {
      double dxhat = static_cast<double>(dyr[j]) * gamma_.value[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhr[j];
      gamma_.grad[j] += dyr[j] * xhr[j];
      beta_.grad[j] += dyr[j];
    }
    double inv_n = 1.0 / static_cast<double>(dim_);
    double inv_std = cached_inv_std_[static_cast<size_t>(r)];
    for (int64_t j = 0; j < dim_; ++j) {
      double dxhat = static_cast<double>(dyr[j]) * gamma_.value[j];
      dx[r * dim_ + j] = static_cast<T>(
          inv_std * (dxhat - inv_n * sum_dxhat - xhr[j] * inv_n * sum_dxhat_xhat));
    }
  }
  return dx;
}

template <typename T>
void LayerNorm<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

// ---------------------------------------------------------------------------
// Dropout

template <typename T>
Dropout<T>::Dropout(double p) : p_(p) {
  if (p_ < 0.0 || p_ >= 1.0) {
    throw std::invalid_argument("dropout probability must be in [0, 1)");
  }
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, bool training, Rng& rng) {
  if (!training || p_ == 0.0) {
    active_ = false;
    return x;
  }
  active_ = true;
  T scale = static_cast<T>(1.0 / (1.0 - p_));
  cached_mask_ = Tensor<T>(x.shape());
  Tensor<T> y(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) {
    T m = rng.uniform() >= p_ ? scale : T{0};
    cached_mask_[i] = m;
    y[i] = x[i] * m;
  }
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& dy) const {
  if (!active_) return dy;
  Tensor<T> dx(dy.shape());
  for (int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * cached_mask_[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Embedding

template <typename T>
Embedding<T>::Embedding(std::string name, int64_t vocab_size, int64_t dim)
    : vocab_size_(vocab_size), dim_(dim) {
  if (vocab_size_ < 1 || dim_ < 1) {
    throw std::invalid_argument("embedding: bad shape");
  }
  weight_.init(name + ".weight", {vocab_size_, dim_});
}

template <typename T>
void Embedding<T>::init_xavier(Rng& rng) {
  xavier_uniform(weight_.value, dim_, vocab_size_, rng);
}

template <typename T>
Tensor<T> Embedding<T>::forward(std::span<const int32_t> ids) {
  cached_ids_.assign(ids.begin(), ids.end());
  Tensor<T> out({static_cast<int64_t>(ids.size()), dim_});
  for (size_t i = 0; i < ids.size(); ++i) {
    int32_t id = ids[i];
    if (id < 0 || id >= vocab_size_) {
      throw DataError("embedding id out of range: " + std::to_string(id));
    }
    const T* src = weight_.value.data() + static_cast<int64_t>(id) * dim_;
    T* dst = out.data() + static_cast<int64_t>(i) * dim_;
    for (int64_t j = 0; j < dim_; ++j) dst[j] = src[j];
  }
  return out;
}

template <typename T>
void Embedding<T>::backward(const Tensor<T>& dy) {
  if (dy.size() != static_cast<int64_t>(cached_ids_.size()) * dim_) {
    throw std::invalid_argument("embedding backward: shape mismatch");
  }
  for (size_t i = 0; i < cached_ids_.size(); ++i) {
    T* dst = weight_.grad.data() + static_cast<int64_t>(cached_ids_[i]) * dim_;
    const T* src = dy.data() + static_cast<int64_t>(i) * dim_;
    for (int64_t j = 0; j < dim_; ++j) dst[j] += src[j];
  }
}

template <typename T>
void Embedding<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
}

// ---------------------------------------------------------------------------
// MultiHeadAttention

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(std::string name, int64_t d_model,
                                          int64_t n_heads)
    : d_model_(d_model), n_heads_(n_heads) {
  if (n_heads_ < 1 || d_model_ % n_heads_ != 0) {
    throw std::invalid_argument("attention: d_model must divide by n_heads");
  }
  d_k_ = d_model_ / n_heads_;
  wq_ = Linear<T>(name + ".wq", d_model_, d_model_);
  wk_ = Linear<T>(name + ".wk", d_model_, d_model_);
  wv_ = Linear<T>(name + ".wv", d_model_, d_model_);
  wo_ = Linear<T>(name + ".wo", d_model_, d_model_);
}

template <typename T>
void MultiHeadAttention<T>::init_xavier(Rng& rng) {
  wq_.init_xavier(rng);
  wk_.init_xavier(rng);
  wv_.init_xavier(rng);
  wo_.init_xavier(rng);
}

template <typename T>
Tensor<T> MultiHeadAttention<T>::forward(const Tensor<T>& query,
                                         const Tensor<T>& keyvalue,
                                         const Tensor<uint8_t>& mask) {
  if (query.rank() != 3 || keyvalue.rank() != 3 || mask.rank() != 3) {
    throw std::invalid_argument("attention expects rank-3 inputs");
  }
  int64_t batch = query.dim(0);
  int64_t lq = query.dim(1);
  int64_t lk = keyvalue.dim(1);
  if (mask.dim(0) != batch || mask.dim(1) != lq || mask.dim(2) != lk) {
    throw std::invalid_argument("attention mask shape mismatch");
  }

  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t i = 0; i < lq; ++i) {
      bool any = false;
      for (int64_t j = 0; j < lk; ++j) {
        if (mask.at(b, i, j)) {
          any = true;
          break;
        }
      }
      if (!any) {
        throw NumericError("attention query row is fully masked (batch " +
                           std::to_string(b) + ", position " +
                           std::to_string(i) + ")");
      }
    }
  }

  q_ = wq_.forward(query);
  k_ = wk_.forward(keyvalue);
  v_ = wv_.forward(keyvalue);

  probs_ = Tensor<T>({batch, n_heads_, lq, lk});
  Tensor<T> context({batch, lq, d_model_});
  const T neg_inf = -std::numeric_limits<T>::infinity();
  const T inv_sqrt_dk = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_k_)));

  for (int64_t b = 0; b < batch; ++b) {
    ConstMatMap<T> qb(q_.data() + b * lq * d_model_, lq, d_model_);
    ConstMatMap<T> kb(k_.data() + b * lk * d_model_, lk, d_model_);
    ConstMatMap<T> vb(v_.data() + b * lk * d_model_, lk, d_model_);
    MatMap<T> cb(context.data() + b * lq * d_model_, lq, d_model_);
    for (int64_t h = 0; h < n_heads_; ++h) {
      MatRM<T> scores(lq, lk);
      scores.noalias() =
          qb.middleCols(h * d_k_, d_k_) * kb.middleCols(h * d_k_, d_k_).transpose();
      scores *= inv_sqrt_dk;

      MatMap<T> pm(probs_.data() + ((b * n_heads_ + h) * lq) * lk, lq, lk);
      for (int64_t i = 0; i < lq; ++i) {
        T row_max = neg_inf;
        for (int64_t j = 0; j < lk; ++j) {
          if (!mask.at(b, i, j)) {
            scores(i, j) = neg_inf;
          } else if (scores(i, j) > row_max) {
            row_max = scores(i, j);
          }
        }
        double denom = 0;
        for (int64_t j = 0; j < lk; ++j) {
          double e = mask.at(b, i, j)
                         ? std::exp(static_cast<double>(scores(i, j) - row_max))
                         : 0.0;
          pm(i, j) = static_cast<T>(e);
          denom += e;
        }
        for (int64_t j = 0; j < lk; ++j) {
          pm(i, j) = static_cast<T>(pm(i, j) / denom);
        }
      }
      cb.middleCols(h * d_k_, d_k_).noalias() =
          pm * vb.middleCols(h * d_k_, d_k_);
    }
  }
  return wo_.forward(context);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> MultiHeadAttention<T>::backward(
    const Tensor<T>& dy) {
  Tensor<T> dcontext = wo_.backward(dy);

  int64_t batch = probs_.dim(0);
  int64_t lq = probs_.dim(2);
  int64_t lk = probs_.dim(3);
  const T inv_sqrt_dk = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_k_)));

  Tensor<T> dq({batch, lq, d_model_});
  Tensor<T> dk({batch, lk, d_model_});
  Tensor<T> dv({batch, lk, d_model_});

  for (int64_t b = 0; b < batch; ++b) {
    ConstMatMap<T> qb(q_.data() + b * lq * d_model_, lq, d_model_);
    ConstMatMap<T> kb(k_.data() + b * lk * d_model_, lk, d_model_);
    ConstMatMap<T> vb(v_.data() + b * lk * d_model_, lk, d_model_);
    ConstMatMap<T> dcb(dcontext.data() + b * lq * d_model_, lq, d_model_);
    MatMap<T> dqb(dq.data() + b * lq * d_model_, lq, d_model_);
    MatMap<T> dkb(dk.data() + b * lk * d_model_, lk, d_model_);
    MatMap<T> dvb(dv.data() + b * lk * d_model_, lk, d_model_);
    for (int64_t h = 0; h < n_heads_; ++h) {
      ConstMatMap<T> pm(probs_.data() + ((b * n_heads_ + h) * lq) * lk, lq, lk);
      auto dch = dcb.middleCols(h * d_k_, d_k_);

      dvb.middleCols(h * d_k_, d_k_).noalias() += pm.transpose() * dch;

      MatRM<T> dp(lq, lk);
      dp.noalias() = dch * vb.middleCols(h * d_k_, d_k_).transpose();

      MatRM<T> ds = pm.cwiseProduct(dp);
      for (int64_t i = 0; i < lq; ++i) {
        T row_dot = ds.row(i).sum();
        ds.row(i) -= row_dot * pm.row(i);
      }
      ds *= inv_sqrt_dk;

      dqb.middleCols(h * d_k_, d_k_).noalias() +=
          ds * kb.middleCols(h * d_k_, d_k_);
      dkb.middleCols(h * d_k_, d_k_).noalias() +=
          ds.transpose() * qb.middleCols(h * d_k_, d_k_);
    }
  }

  Tensor<T> dquery = wq_.backward(dq);
  Tensor<T> dkeyvalue = wk_.backward(dk);
  add_into(dkeyvalue, wv_.backward(dv));
  return {std::move(dquery), std::move(dkeyvalue)};
}

template <typename T>
void MultiHeadAttention<T>::collect(std::vector<Parameter<T>*>& out) {
  wq_.collect(out);
  wk_.collect(out);
  wv_.collect(out);
  wo_.collect(out);
}

// ---------------------------------------------------------------------------
// FeedForward

template <typename T>
FeedForward<T>::FeedForward(std::string name, int64_t d_model, int64_t d_ff)
    : fc1_(name + ".fc1", d_model, d_ff), fc2_(name + ".fc2", d_ff, d_model) {}

template <typename T>
void FeedForward<T>::init_xavier(Rng& rng) {
  fc1_.init_xavier(rng);
  fc2_.init_xavier(rng);
}

template <typename T>
Tensor<T> FeedForward<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = fc1_.forward(x);
  cached_pre_relu_ = h;
  for (int64_t i = 0; i < h.size(); ++i) {
    if (h[i] < T{0}) h[i] = T{0};
  }
  return fc2_.forward(h);
}

template <typename T>
Tensor<T> FeedForward<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dh = fc2_.backward(dy);
  for (int64_t i = 0; i < dh.size(); ++i) {
    if (cached_pre_relu_[i] <= T{0}) dh[i] = T{0};
  }
  return fc1_.backward(dh);
}

template <typename T>
void FeedForward<T>::collect(std::vector<Parameter<T>*>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
}

// ---------------------------------------------------------------------------
// Loss, clipping, optimizer

template <typename T>
CrossEntropyResult<T> cross_entropy(const Tensor<T>& logits,
                                    std::span<const int32_t> targets,
                                    int32_t ignore_id) {
  if (logits.rank() != 2) throw std::invalid_argument("cross_entropy: rank");
  int64_t n = logits.dim(0);
  int64_t v = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != n) {
    throw std::invalid_argument("cross_entropy: target count mismatch");
  }

  int64_t count = 0;
  for (int32_t t : targets) {
    if (t == ignore_id) continue;
    if (t < 0 || t >= v) {
      throw DataError("cross_entropy target out of range: " + std::to_string(t));
    }
    ++count;
  }
  if (count == 0) throw DataError("cross_entropy saw only ignored targets");

  CrossEntropyResult<T> res;
  res.tokens = count;
  res.dlogits = Tensor<T>(logits.shape());
  double inv_count = 1.0 / static_cast<double>(count);
  double loss_sum = 0;

  for (int64_t r = 0; r < n; ++r) {
    if (targets[static_cast<size_t>(r)] == ignore_id) continue;
    const T* row = logits.data() + r * v;
    double row_max = row[0];
    for (int64_t j = 1; j < v; ++j) row_max = std::max<double>(row_max, row[j]);
    double denom = 0;
    for (int64_t j = 0; j < v; ++j) denom += std::exp(row[j] - row_max);
    double log_denom = std::log(denom);
    int32_t t = targets[static_cast<size_t>(r)];
    loss_sum += row_max + log_denom - row[t];
    T* drow = res.dlogits.data() + r * v;
    for (int64_t j = 0; j < v; ++j) {
      double p = std::exp(row[j] - row_max) / denom;
      drow[j] = static_cast<T>((p - (j == t ? 1.0 : 0.0)) * inv_count);
    }
  }

  res.loss = loss_sum * inv_count;
  if (!std::isfinite(res.loss)) {
    throw NumericError("cross_entropy produced a non-finite loss");
  }
  return res;
}

template <typename T>
double clip_grad_norm(const std::vector<Parameter<T>*>& params,
                      double max_norm) {
  double sum_sq = 0;
  for (const Parameter<T>* p : params) {
    for (int64_t i = 0; i < p->grad.size(); ++i) {
      double g = p->grad[i];
      sum_sq += g * g;
    }
  }
  double norm = std::sqrt(sum_sq);
  if (!std::isfinite(norm)) {
    throw NumericError("gradient norm is not finite");
  }
  if (norm > max_norm && norm > 0) {
    T scale = static_cast<T>(max_norm / norm);
    for (Parameter<T>* p : params) {
      for (int64_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= scale;
    }
  }
  return norm;
}

template <typename T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, double lr, double beta1,
              double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Parameter<T>* p : params_) {
    m_.emplace_back(static_cast<size_t>(p->value.size()), T{});
    v_.emplace_back(static_cast<size_t>(p->value.size()), T{});
  }
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter<T>& p = *params_[pi];
    std::vector<T>& m = m_[pi];
    std::vector<T>& v = v_[pi];
    for (int64_t i = 0; i < p.value.size(); ++i) {
      double g = p.grad[i];
      double mi = beta1_ * m[static_cast<size_t>(i)] + (1.0 - beta1_) * g;
      double vi = beta2_ * v[static_cast<size_t>(i)] + (1.0 - beta2_) * g * g;
      m[static_cast<size_t>(i)] = static_cast<T>(mi);
      v[static_cast<size_t>(i)] = static_cast<T>(vi);
      double update = lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
      p.value[i] = static_cast<T>(p.value[i] - update);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (Parameter<T>* p : params_) p->grad.zero();
}

// ---------------------------------------------------------------------------

template void zero_grads<float>(const std::vector<Parameter<float>*>&);
template void zero_grads<double>(const std::vector<Parameter<double>*>&);
template void xavier_uniform<float>(Tensor<float>&, int64_t, int64_t, Rng&);
template void xavier_uniform<double>(Tensor<double>&, int64_t, int64_t, Rng&);
template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;
template class Dropout<float>;
template class Dropout<double>;
template class Embedding<float>;
template class Embedding<double>;
template class MultiHeadAttention<float>;
template class MultiHeadAttention<double>;
template class FeedForward<float>;
template class FeedForward<double>;
template CrossEntropyResult<float> cross_entropy<float>(
    const Tensor<float>&, std::span<const int32_t>, int32_t);
template CrossEntropyResult<double> cross_entropy<double>(
    const Tensor<double>&, std::span<const int32_t>, int32_t);
template double clip_grad_norm<float>(const std::vector<Parameter<float>*>&,
                                      double);
template double clip_grad_norm<double>(const std::vector<Parameter<double>*>&,
                                       double);
template class Adam<float>;
template class Adam<double>;

}  // namespace g2p
