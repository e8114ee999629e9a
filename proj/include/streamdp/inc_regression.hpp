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

#ifndef STREAMDP_INC_REGRESSION_HPP
#define STREAMDP_INC_REGRESSION_HPP

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/optimizer.hpp"
#include "streamdp/stream.hpp"
#include "streamdp/tree_mechanism.hpp"

namespace streamdp {

// Exact gradient of the squared loss over a prefix:
//   2 * (sum_i x_i x_i^T theta - sum_i x_i y_i).
inline Eigen::VectorXd true_gradient(std::span<const StreamPoint> prefix,
                                     const Eigen::VectorXd& theta) {
  if (!theta.allFinite()) throw InvalidInput("true_gradient: non-finite theta");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  for (const auto& z : prefix) {
    if (z.x.size() != theta.size()) throw InvalidInput("true_gradient: dimension mismatch");
    g += 2.0 * (z.x.dot(theta) - z.y) * z.x;
  }
  return g;
}

// A released affine gradient map theta -> 2(Q theta - q). Once built, it can
// be evaluated at any number of points at no further privacy cost.
struct PrivateGradientFn {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;

  Eigen::VectorXd operator()(const Eigen::VectorXd& theta) const {
    return 2.0 * (Q * theta - q);
  }
};

// Tunable constants the underlying formulas leave unspecified.
struct RunConstants {
  double c_alpha = 2.0;          // scale of the assumed gradient-oracle error
  double c_m = 1.0;              // scale of the projected dimension (projected run)
  int iteration_cap = kDefaultIterationCap;
};

// Derived quantities of one run, echoed into reports for auditability.
struct IncRegParams {
  double eps_tree = 0.0;
  double delta_tree = 0.0;
  double kappa = 0.0;
  double alpha_prime = 0.0;
  int iterations = 0;
  double beta_per_step = 0.0;
};

namespace detail {

// kappa = (log2 T)^{3/2} * sqrt(ln(1/delta')) / eps', the per-coordinate
// error scale of a tree-aggregated sum at sensitivity 1.
inline double tree_error_scale(int T, double eps_prime, double delta_prime) {
  double l = std::max(std::log2(static_cast<double>(T)), 1.0);
  return std::pow(l, 1.5) * std::sqrt(std::log(1.0 / delta_prime)) / eps_prime;
}

// Exact constrained minimization of theta^T Q theta - 2 q^T theta, used when
// noise is disabled and the released gradient function is exact.
inline Eigen::VectorXd minimize_quadratic(const ConstraintSet& set, const Eigen::MatrixXd& Q,
                                          const Eigen::VectorXd& q, const Eigen::VectorXd& warm) {
  ErmObjective objective(Q, q, 0.0);
  MinimizeOptions options;
  options.start = warm;
  options.max_iterations = 200'000;
  options.relative_gap_tol = 1e-9;
  return exact_minimizer(set, objective, options).theta;
}

}  // namespace detail

// Private incremental least squares. Two tree mechanisms (each at half the
// budget) maintain noised versions of sum x_i y_i and of sum x_i x_i^T (the
// latter streamed as flattened d^2 vectors with Frobenius sensitivity 2).
// Each timestep assembles the private gradient function from the tree
// outputs and runs projected gradient descent warm-started at the previous
// output. Every emitted point is feasible.
class PrivIncRegRun {
 public:
  PrivIncRegRun(const ConstraintSet& set, int T, const PrivacyBudget& budget, double beta,
                std::uint64_t seed, RunConstants constants = {},
                IngestPolicy ingest = IngestPolicy::Reject)
      : set_(set),
        T_(T),
        d_(set.dim()),
        budget_(budget),
        ingest_(ingest),
        q_tree_(T, set.dim(), PrivacyBudget(budget.epsilon / 2, budget.delta / 2),
                SensitivityBound(2.0), Rng(seed).substream(1)),
        Q_tree_(T, set.dim() * set.dim(), PrivacyBudget(budget.epsilon / 2, budget.delta / 2),
                SensitivityBound(2.0), Rng(seed).substream(2)) {
    if (T < 1) throw InvalidInput("priv_inc_reg: T must be >= 1");
    if (!(beta > 0) || !(beta < 1)) throw InvalidInput("priv_inc_reg: beta must be in (0, 1)");
    params_.eps_tree = budget.epsilon / 2;
    params_.delta_tree = budget.delta / 2;
    params_.kappa = detail::tree_error_scale(T, params_.eps_tree, params_.delta_tree);
    params_.beta_per_step = beta / T;
    double diam = set.diameter();
    params_.alpha_prime = constants.c_alpha * params_.kappa * diam *
                          (std::sqrt(static_cast<double>(d_)) +
                           std::sqrt(std::log(1.0 / params_.beta_per_step)));
    params_.iterations =
        default_iterations(params_.alpha_prime, T * diam, constants.iteration_cap);
    ledger_.charge(params_.eps_tree, params_.delta_tree, "tree:q");
    ledger_.charge(params_.eps_tree, params_.delta_tree, "tree:Q");
    theta_ = set.project(Eigen::VectorXd::Zero(d_));
  }

  // Ingests one point and returns theta_t. `flagged`, when given, reports
  // that the optimizer failed and the previous output was re-emitted.
  Eigen::VectorXd step(const StreamPoint& raw, bool* flagged = nullptr) {
    if (flagged != nullptr) *flagged = false;
    bool clipped = false;
    StreamPoint z = ingest_point(raw, ingest_, &clipped);
    clip_count_ += clipped ? 1 : 0;
    if (z.x.size() != d_) throw InvalidInput("priv_inc_reg: covariate dimension mismatch");

    Eigen::VectorXd q = q_tree_.step(z.y * z.x);
    Eigen::MatrixXd outer = z.x * z.x.transpose();
    Eigen::VectorXd Q_flat = Q_tree_.step(Eigen::Map<const Eigen::VectorXd>(outer.data(), d_ * d_));
    Eigen::MatrixXd Q = Eigen::Map<const Eigen::MatrixXd>(Q_flat.data(), d_, d_);
    // The exact sum is symmetric; symmetrizing the noised release is
    // post-processing.
    gradient_fn_.Q = 0.5 * (Q + Q.transpose());
    gradient_fn_.q = q;
    ++t_;

    try {
      if (noise_disabled()) {
        // The released gradient function is exact; solve it to convergence
        // so the output tracks the true risk minimizer.
        theta_ = detail::minimize_quadratic(set_, gradient_fn_.Q, gradient_fn_.q, theta_);
      } else {
        GradientOracle oracle;
        oracle.alpha = params_.alpha_prime;
        oracle.lipschitz = 2.0 * t_ * (1.0 + set_.diameter());
        oracle.eval = [this](const Eigen::VectorXd& theta) { return gradient_fn_(theta); };
        PgdConfig cfg;
        cfg.iterations = params_.iterations;
        cfg.start = theta_;
        theta_ = noisy_projected_gradient(set_, oracle, cfg);
      }
    } catch (const NumericalFailure&) {
      if (flagged != nullptr) *flagged = true;  // keep the previous feasible output
    }
    return theta_;
  }

  int t() const { return t_; }
  int stream_length() const { return T_; }
  const IncRegParams& params() const { return params_; }
  const BudgetLedger& ledger() const { return ledger_; }
  const PrivateGradientFn& gradient_fn() const { return gradient_fn_; }
  const ConstraintSet& constraint() const { return set_; }
  int clip_count() const { return clip_count_; }

 private:
  ConstraintSet set_;
  int T_;
  int d_;
  int t_ = 0;
  PrivacyBudget budget_;
  IngestPolicy ingest_;
  int clip_count_ = 0;
  TreeMechanism q_tree_;
  TreeMechanism Q_tree_;
  IncRegParams params_;
  BudgetLedger ledger_;
  PrivateGradientFn gradient_fn_;
  Eigen::VectorXd theta_;
};

// Whole-stream convenience wrapper.
struct IncRegResult {
  std::vector<Eigen::VectorXd> outputs;
  std::vector<bool> flagged;
  IncRegParams params;
  BudgetLedger ledger;
};

inline IncRegResult run_priv_inc_reg(std::span<const StreamPoint> stream,
                                     const ConstraintSet& set, const PrivacyBudget& budget,
                                     double beta, std::uint64_t seed,
                                     RunConstants constants = {},
                                     IngestPolicy ingest = IngestPolicy::Reject) {
  PrivIncRegRun run(set, static_cast<int>(stream.size()), budget, beta, seed, constants, ingest);
  IncRegResult result;
  result.outputs.reserve(stream.size());
  result.flagged.reserve(stream.size());
  for (const auto& z : stream) {
    bool flag = false;
    result.outputs.push_back(run.step(z, &flag));
    result.flagged.push_back(flag);
  }
  result.params = run.params();
  result.ledger = run.ledger();
  return result;
}

}  // namespace streamdp

#endif  // STREAMDP_INC_REGRESSION_HPP
