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

#ifndef G2P_SRC_EIGEN_UTIL_H_
#define G2P_SRC_EIGEN_UTIL_H_

#include <Eigen/Dense>

namespace g2p {

// Maps over Tensor storage. Tensors are row-major, so every map must be too.
template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using MatMap = Eigen::Map<MatRM<T>>;

template <typename T>
using ConstMatMap = Eigen::Map<const MatRM<T>>;

template <typename T>
using RowVecMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

template <typename T>
using ConstRowVecMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

}  // namespace g2p

#endif  // G2P_SRC_EIGEN_UTIL_H_
