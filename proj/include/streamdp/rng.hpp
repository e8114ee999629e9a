//
// Copyright 2026 The streamdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef STREAMDP_RNG_HPP
#define STREAMDP_RNG_HPP

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace streamdp {

// Seedable counter-style generator (splitmix64 core). The same seed always
// yields the same stream on every platform, which is what makes experiment
// runs byte-reproducible. Substreams are derived from the construction seed
// and a stream index, so independent components of an algorithm (projection
// matrix, each tree, each solver) can be given decorrelated streams whose
// layout is stable under code changes elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {
    // Burn one output so that small seeds do not start near-identically.
    next_u64();
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  // Derived stream number `index`, a pure function of the construction seed.
  // Streams with distinct indices are decorrelated regardless of how much
  // this instance has been consumed.
  Rng substream(std::uint64_t index) const {
    std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(z);
  }

  std::uint64_t seed() const { return seed_; }

  // State accessors for checkpointing.
  std::uint64_t state() const { return state_; }
  bool has_cached() const { return has_cached_; }
  double cached() const { return cached_; }
  void restore(std::uint64_t state, bool has_cached, double cached) {
    state_ = state;
    has_cached_ = has_cached;
    cached_ = cached;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace streamdp

#endif  // STREAMDP_RNG_HPP
