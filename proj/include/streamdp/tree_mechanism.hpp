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

#ifndef STREAMDP_TREE_MECHANISM_HPP
#define STREAMDP_TREE_MECHANISM_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/rng.hpp"

namespace streamdp {

// Continual release of private prefix sums of a vector stream. Dyadic
// partial sums are kept in one slot per binary level; each slot is noised
// once when it completes, so every input ends up inside at most
// ceil(log2 T) + 1 noised values. Memory is O(d log T); no input buffer
// exists.
//
// Noise per slot coordinate: sigma^2 = 2 * L^2 * Delta2^2 * ln(2/delta) / eps^2
// with L = max(ceil(log2 T), 1). Logs of the stream length are base 2
// throughout (they count tree levels); the degenerate T = 1 case keeps one
// noised slot rather than none.
class TreeMechanism {
 public:
  TreeMechanism(int stream_length, int payload_dim, const PrivacyBudget& budget,
                const SensitivityBound& sensitivity, Rng rng)
      : T_(stream_length),
        d_(payload_dim),
        t_(0),
        rng_(rng),
        budget_(budget),
        sensitivity_(sensitivity) {
    if (stream_length < 1) throw InvalidInput("tree: stream length must be >= 1");
    if (payload_dim < 1) throw InvalidInput("tree: payload dimension must be >= 1");
    levels_ = ceil_log2(T_) + 1;
    noise_levels_ = std::max(ceil_log2(T_), 1);
    sigma2_ = noise_disabled()
                  ? 0.0
                  : 2.0 * static_cast<double>(noise_levels_) * noise_levels_ *
                        sensitivity.delta2 * sensitivity.delta2 *
                        std::log(2.0 / budget.delta) / (budget.epsilon * budget.epsilon);
    exact_.assign(levels_, Eigen::VectorXd::Zero(d_));
    noised_.assign(levels_, Eigen::VectorXd::Zero(d_));
  }

  // Ingests v_t and returns the noised prefix sum s_t. Throws once the
  // declared stream length is exhausted.
  Eigen::VectorXd step(const Eigen::VectorXd& v) {
    if (t_ >= T_) throw StreamExhausted("tree: stream length exceeded");
    if (v.size() != d_) throw InvalidInput("tree: payload dimension mismatch");
    ++t_;
    int level = lowest_set_bit(t_);

    Eigen::VectorXd acc = v;
    for (int j = 0; j < level; ++j) {
      acc += exact_[j];
      exact_[j].setZero();
      noised_[j].setZero();
    }
    exact_[level] = acc;
    noised_[level] = acc;
    if (sigma2_ > 0.0) {
      double sigma = std::sqrt(sigma2_);
      for (int i = 0; i < d_; ++i) noised_[level][i] += sigma * rng_.gaussian();
    }
    if (!participation_.empty()) {
      // The slot finished at time t_ covers inputs (t_ - 2^level, t_].
      for (int u = t_ - (1 << level) + 1; u <= t_; ++u) ++participation_[u - 1];
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d_);
    for (int j = 0; j < levels_; ++j) {
      if ((t_ >> j) & 1) sum += noised_[j];
    }
    return sum;
  }

  int t() const { return t_; }
  int stream_length() const { return T_; }
  int payload_dim() const { return d_; }
  int levels() const { return levels_; }
  double sigma2() const { return sigma2_; }

  // Test instrumentation: counts, per input index, how many noised slots
  // that input was folded into. Allocates O(T); off by default.
  void enable_participation_tracking() { participation_.assign(T_, 0); }
  const std::vector<int>& participation_counts() const { return participation_; }

  // Binary checkpoint (little-endian, versioned) of the full state including
  // the generator position, sufficient to resume the stream after a crash.
  void save(std::ostream& out) const {
    write_u32(out, kMagic);
    write_u32(out, kVersion);
    write_i64(out, T_);
    write_i64(out, d_);
    write_i64(out, t_);
    write_i64(out, levels_);
    write_f64(out, sigma2_);
    for (int j = 0; j < levels_; ++j) {
      write_vec(out, exact_[j]);
      write_vec(out, noised_[j]);
    }
    write_u64(out, rng_.seed());
    write_u64(out, rng_.state());
    char cached_flag = rng_.has_cached() ? 1 : 0;
    out.write(&cached_flag, 1);
    write_f64(out, rng_.cached());
  }

  static TreeMechanism load(std::istream& in, const PrivacyBudget& budget,
                            const SensitivityBound& sensitivity) {
    if (read_u32(in) != kMagic) throw InvalidInput("tree checkpoint: bad magic");
    if (read_u32(in) != kVersion) throw InvalidInput("tree checkpoint: unknown version");
    std::int64_t T = read_i64(in);
    std::int64_t d = read_i64(in);
    std::int64_t t = read_i64(in);
    std::int64_t levels = read_i64(in);
    double sigma2 = read_f64(in);
    TreeMechanism tree(static_cast<int>(T), static_cast<int>(d), budget, sensitivity, Rng(0));
    if (tree.levels_ != levels) throw InvalidInput("tree checkpoint: level mismatch");
    tree.t_ = static_cast<int>(t);
    tree.sigma2_ = sigma2;
    for (int j = 0; j < tree.levels_; ++j) {
      tree.exact_[j] = read_vec(in, static_cast<int>(d));
      tree.noised_[j] = read_vec(in, static_cast<int>(d));
    }
    std::uint64_t seed = read_u64(in);
    std::uint64_t state = read_u64(in);
    char cached_flag = 0;
    in.read(&cached_flag, 1);
    double cached = read_f64(in);
    tree.rng_ = Rng(seed);
    tree.rng_.restore(state, cached_flag != 0, cached);
    if (!in) throw InvalidInput("tree checkpoint: truncated");
    return tree;
  }

  static int ceil_log2(int n) {
    int l = 0;
    int v = 1;
    while (v < n) {
      v <<= 1;
      ++l;
    }
    return l;
  }

 private:
  static int lowest_set_bit(int t) {
    int i = 0;
    while (((t >> i) & 1) == 0) ++i;
    return i;
  }

  static constexpr std::uint32_t kMagic = 0x53445054;  // "SDPT"
  static constexpr std::uint32_t kVersion = 1;

  static void write_u32(std::ostream& out, std::uint32_t v) { write_raw(out, v); }
  static void write_u64(std::ostream& out, std::uint64_t v) { write_raw(out, v); }
  static void write_i64(std::ostream& out, std::int64_t v) { write_raw(out, v); }
  static void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_raw(out, bits);
  }
  template <typename T>
  static void write_raw(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
  }
  static void write_vec(std::ostream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(out, v[i]);
  }

  static std::uint32_t read_u32(std::istream& in) { return read_raw<std::uint32_t>(in); }
  static std::uint64_t read_u64(std::istream& in) { return read_raw<std::uint64_t>(in); }
  static std::int64_t read_i64(std::istream& in) { return static_cast<std::int64_t>(read_raw<std::uint64_t>(in)); }
  static double read_f64(std::istream& in) {
    std::uint64_t bits = read_raw<std::uint64_t>(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  template <typename T>
  static T read_raw(std::istream& in) {
    unsigned char buf[sizeof(T)] = {};
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }
  static Eigen::VectorXd read_vec(std::istream& in, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = read_f64(in);
    return v;
  }

  int T_;
  int d_;
  int t_;
  int levels_;        // slots: ceil(log2 T) + 1
  int noise_levels_;  // max(ceil(log2 T), 1), enters the variance
  double sigma2_;
  std::vector<Eigen::VectorXd> exact_;
  std::vector<Eigen::VectorXd> noised_;
  std::vector<int> participation_;
  Rng rng_;
  PrivacyBudget budget_;
  SensitivityBound sensitivity_;
};

}  // namespace streamdp

#endif  // STREAMDP_TREE_MECHANISM_HPP
