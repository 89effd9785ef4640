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

#ifndef G2P_TENSOR_H_
#define G2P_TENSOR_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2p {

// Dense row-major tensor. Owns its storage; no views, no broadcasting.
// Layers that need matrix algebra map the flat buffer themselves.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(check_shape(shape_)), T{});
  }

  Tensor(std::vector<int64_t> shape, T fill) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(check_shape(shape_)), fill);
  }

  static Tensor zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

  int64_t dim(int64_t i) const {
    if (i < 0 || i >= rank()) throw std::out_of_range("tensor dim out of range");
    return shape_[static_cast<size_t>(i)];
  }

  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T& at(int64_t i, int64_t j) {
    return data_[static_cast<size_t>(i * shape_[1] + j)];
  }
  const T& at(int64_t i, int64_t j) const {
    return data_[static_cast<size_t>(i * shape_[1] + j)];
  }

  T& at(int64_t i, int64_t j, int64_t k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  const T& at(int64_t i, int64_t j, int64_t k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }

  T& at(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[static_cast<size_t>(
        ((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  const T& at(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[static_cast<size_t>(
        ((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  void fill(T value) { data_.assign(data_.size(), value); }
  void zero() { fill(T{}); }

  // Relabels dimensions without touching storage; element count must match.
  void reshape(std::vector<int64_t> shape) {
    if (check_shape(shape) != size()) {
      throw std::invalid_argument("reshape changes element count");
    }
    shape_ = std::move(shape);
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (size_t i = 0; i < data_.size(); ++i) {
      out[static_cast<int64_t>(i)] = static_cast<U>(data_[i]);
    }
    return out;
  }

 private:
  static int64_t check_shape(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("negative tensor dimension");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

// dst += src, elementwise.
template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  if (dst.size() != src.size()) {
    throw std::invalid_argument("add_into: size mismatch");
  }
  for (int64_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace g2p

#endif  // G2P_TENSOR_H_
