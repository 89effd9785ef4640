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

#ifndef G2P_RNG_H_
#define G2P_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace g2p {

// Deterministic pseudo-random stream. The generator is mt19937_64, whose
// output sequence is fixed by the standard, and every derived draw below is
// computed from raw 64-bit words only. The same seed therefore yields the
// same stream on every platform; std::uniform_real_distribution and
// std::shuffle are implementation-defined and deliberately not used.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Unbiased index in [0, n). n must be > 0.
  uint64_t index(uint64_t n);
  // True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates shuffle driven by index().
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent substream for (seed, stream_id) pairs, e.g. per-epoch batch
  // shuffles.
  static Rng substream(uint64_t seed, uint64_t stream_id);

 private:
  std::mt19937_64 gen_;
};

// splitmix64-style finalizer over the pair; used to derive substream seeds.
uint64_t mix64(uint64_t a, uint64_t b);

}  // namespace g2p

#endif  // G2P_RNG_H_
