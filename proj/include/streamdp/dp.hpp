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

#ifndef STREAMDP_DP_HPP
#define STREAMDP_DP_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "streamdp/errors.hpp"
#include "streamdp/rng.hpp"

namespace streamdp {

// (epsilon, delta) privacy parameters as supplied by a caller. Computed
// totals (which may legitimately be (0, 0) or unbounded) use EpsDelta below.
struct PrivacyBudget {
  double epsilon;
  double delta;

  PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
    if (!(eps > 0) || !std::isfinite(eps))
      throw InvalidInput("privacy budget: epsilon must be positive");
    if (!(del > 0) || !(del < 1))
      throw InvalidInput("privacy budget: delta must be in (0, 1)");
  }
};

struct EpsDelta {
  double epsilon = 0.0;
  double delta = 0.0;
};

// L2-sensitivity of the summed quantity a mechanism releases.
struct SensitivityBound {
  double delta2;

  explicit SensitivityBound(double d2) : delta2(d2) {
    if (!(d2 >= 0) || !std::isfinite(d2))
      throw InvalidInput("sensitivity: delta2 must be finite and nonnegative");
  }
};

// Global debug switch: zeroes all privacy noise so runs can be compared
// against exact oracles. Any ledger that records an interaction while the
// switch is on reports infinite epsilon, so a noise-free run can never be
// mistaken for a private one.
inline bool& noise_disabled_flag() {
  static bool flag = false;
  return flag;
}
inline bool noise_disabled() { return noise_disabled_flag(); }
inline void set_noise_disabled(bool value) { noise_disabled_flag() = value; }

class ScopedNoiseDisable {
 public:
  explicit ScopedNoiseDisable(bool on = true) : previous_(noise_disabled()) {
    set_noise_disabled(on);
  }
  ~ScopedNoiseDisable() { set_noise_disabled(previous_); }
  ScopedNoiseDisable(const ScopedNoiseDisable&) = delete;
  ScopedNoiseDisable& operator=(const ScopedNoiseDisable&) = delete;

 private:
  bool previous_;
};

// Per-coordinate variance of the Gaussian mechanism: 2*Delta2^2*ln(2/delta)/eps^2.
inline double gaussian_noise_variance(const SensitivityBound& s, const PrivacyBudget& b) {
  return 2.0 * s.delta2 * s.delta2 * std::log(2.0 / b.delta) / (b.epsilon * b.epsilon);
}

// Releases value + Y with Y i.i.d. centered Gaussian per coordinate,
// calibrated to the L2 sensitivity. Zero sensitivity (or the global
// noise-disabled switch) returns the value unchanged without consuming
// randomness.
inline Eigen::VectorXd gaussian_mechanism(const Eigen::VectorXd& value,
                                          const SensitivityBound& s,
                                          const PrivacyBudget& b, Rng& rng) {
  double variance = noise_disabled() ? 0.0 : gaussian_noise_variance(s, b);
  if (variance == 0.0) return value;
  double sigma = std::sqrt(variance);
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.gaussian();
  return out;
}

// (k*eps, k*delta) for k adaptive interactions; entries may be heterogeneous,
// in which case they are summed.
inline EpsDelta compose_basic(const std::vector<EpsDelta>& interactions) {
  EpsDelta total;
  for (const auto& it : interactions) {
    total.epsilon += it.epsilon;
    total.delta += it.delta;
  }
  return total;
}

// Strong composition for k adaptive interactions, each (eps, delta)-private:
// (eps*sqrt(2k*ln(1/delta_star)) + 2k*eps^2, k*delta + delta_star). Requires
// eps <= 1 (hypothesis of the statement being evaluated).
inline EpsDelta compose_advanced(int k, double eps, double delta, double delta_star) {
  if (k < 0) throw InvalidInput("compose_advanced: k must be >= 0");
  if (eps > 1.0) throw OutOfRange("compose_advanced: requires eps <= 1");
  if (!(delta_star > 0)) throw InvalidInput("compose_advanced: delta_star must be positive");
  if (k == 0) return {0.0, delta_star};
  double eps_total = eps * std::sqrt(2.0 * k * std::log(1.0 / delta_star)) + 2.0 * k * eps * eps;
  return {eps_total, k * delta + delta_star};
}

// Per-call budget for a mechanism that touches the data once every tau of T
// timesteps: eps' = eps / (2*sqrt((2T/tau)*ln(2/delta))), delta' = delta*tau/(2T).
// Re-composing the T/tau calls with delta_star = delta/2 stays within
// (eps, delta).
inline PrivacyBudget split_for_inc_erm(const PrivacyBudget& b, int T, int tau) {
  if (T < 1 || tau < 1 || tau > T) throw InvalidInput("split_for_inc_erm: need 1 <= tau <= T");
  double calls = static_cast<double>(T) / tau;
  double eps_prime = b.epsilon / (2.0 * std::sqrt(2.0 * calls * std::log(2.0 / b.delta)));
  double delta_prime = b.delta * tau / (2.0 * T);
  return PrivacyBudget(eps_prime, delta_prime);
}

// Append-only record of privacy interactions with both composition modes.
// Single-writer; interactions recorded while noise is globally disabled
// poison the reported totals with infinite epsilon.
class BudgetLedger {
 public:
  struct Interaction {
    double epsilon;
    double delta;
    bool noise_free;
    std::string label;
  };

  void charge(double epsilon, double delta, std::string label = "") {
    items_.push_back({epsilon, delta, noise_disabled(), std::move(label)});
  }

  const std::vector<Interaction>& interactions() const { return items_; }
  std::size_t size() const { return items_.size(); }

  EpsDelta total_basic() const {
    EpsDelta total;
    for (const auto& it : items_) {
      total.epsilon += it.epsilon;
      total.delta += it.delta;
    }
    if (any_noise_free()) total.epsilon = std::numeric_limits<double>::infinity();
    return total;
  }

  // Advanced composition over the recorded interactions. Heterogeneous
  // entries are handled conservatively by composing at the maximum recorded
  // (epsilon, delta).
  EpsDelta total_advanced(double delta_star) const {
    if (items_.empty()) return {0.0, delta_star};
    double max_eps = 0.0, max_delta = 0.0;
    for (const auto& it : items_) {
      max_eps = std::max(max_eps, it.epsilon);
      max_delta = std::max(max_delta, it.delta);
    }
    EpsDelta total = compose_advanced(static_cast<int>(items_.size()), max_eps, max_delta, delta_star);
    if (any_noise_free()) total.epsilon = std::numeric_limits<double>::infinity();
    return total;
  }

  nlohmann::json to_json(double delta_star) const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : items_) {
      items.push_back({{"epsilon", it.epsilon},
                       {"delta", it.delta},
                       {"noise_free", it.noise_free},
                       {"label", it.label}});
    }
    EpsDelta basic = total_basic();
    EpsDelta advanced = total_advanced(delta_star);
    auto enc = [](double v) -> nlohmann::json {
      if (std::isinf(v)) return "inf";
      return v;
    };
    return {{"interactions", items},
            {"total_basic", {{"epsilon", enc(basic.epsilon)}, {"delta", basic.delta}}},
            {"total_advanced",
             {{"epsilon", enc(advanced.epsilon)}, {"delta", advanced.delta}, {"delta_star", delta_star}}}};
  }

 private:
  bool any_noise_free() const {
    for (const auto& it : items_)
      if (it.noise_free) return true;
    return false;
  }

  std::vector<Interaction> items_;
};

}  // namespace streamdp

#endif  // STREAMDP_DP_HPP
