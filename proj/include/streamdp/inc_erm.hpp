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

#ifndef STREAMDP_INC_ERM_HPP
#define STREAMDP_INC_ERM_HPP

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/losses.hpp"
#include "streamdp/optimizer.hpp"
#include "streamdp/stream.hpp"

namespace streamdp {

// Refresh-interval policies. Each balances the staleness of a held estimate
// against the extra privacy noise from reusing the data more often.
enum class TauPolicy { Convex, StronglyConvex, LowWidth };

struct TauParams {
  int T = 0;
  int d = 0;
  double epsilon = 0.0;
  double lipschitz = 0.0;        // L
  double diameter = 0.0;         // ||C||
  double strong_convexity = 0.0; // nu      (StronglyConvex)
  double curvature = 0.0;        // C_j     (LowWidth)
  double width = 0.0;            // w(C)    (LowWidth)
};

// Batch-refresh interval, clamped to [1, T]:
//   Convex:         ceil((T d)^{1/3} / eps^{2/3})
//   StronglyConvex: ceil(sqrt(d L) / (nu^{1/2} eps ||C||^{1/2}))
//   LowWidth:       ceil(sqrt(T w(C)) C_j^{1/4} / ((L ||C||)^{1/4} eps^{1/2}))
inline int choose_tau(TauPolicy policy, const TauParams& p) {
  if (p.T < 1 || p.d < 1 || !(p.epsilon > 0))
    throw InvalidInput("choose_tau: need T >= 1, d >= 1, epsilon > 0");
  double value = 0.0;
  switch (policy) {
    case TauPolicy::Convex:
      value = std::pow(static_cast<double>(p.T) * p.d, 1.0 / 3.0) / std::pow(p.epsilon, 2.0 / 3.0);
      break;
    case TauPolicy::StronglyConvex:
      if (!(p.strong_convexity > 0) || !(p.lipschitz > 0) || !(p.diameter > 0))
        throw InvalidInput("choose_tau: strongly-convex policy needs nu, L, diameter");
      value = std::sqrt(p.d * p.lipschitz) /
              (std::sqrt(p.strong_convexity) * p.epsilon * std::sqrt(p.diameter));
      break;
    case TauPolicy::LowWidth:
      if (!(p.curvature > 0) || !(p.width > 0) || !(p.lipschitz > 0) || !(p.diameter > 0))
        throw InvalidInput("choose_tau: low-width policy needs curvature, width, L, diameter");
      value = std::sqrt(static_cast<double>(p.T) * p.width) * std::pow(p.curvature, 0.25) /
              (std::pow(p.lipschitz * p.diameter, 0.25) * std::sqrt(p.epsilon));
      break;
  }
  double clamped = std::min(std::max(std::ceil(value), 1.0), static_cast<double>(p.T));
  return static_cast<int>(clamped);
}

// A private batch ERM solver: minimizes the empirical risk of `loss` over
// the given prefix under the advertised per-call budget.
using BatchSolverFn =
    std::function<Eigen::VectorXd(std::span<const StreamPoint>, const ConstraintSet&,
                                  const LossSpec&, const PrivacyBudget&, Rng&)>;

struct BatchSolverSpec {
  int iterations = 25;  // gradient releases per batch call
};

// Private batch ERM by gradient perturbation: projected gradient descent in
// which every full-batch gradient is released through the Gaussian mechanism.
// The per-iteration budget is solved from strong composition so the call as
// a whole is (eps', delta')-private. With noise disabled the gradient is
// exact and the solve runs to convergence instead of the fixed schedule.
inline Eigen::VectorXd batch_solver_gradient_perturbation(
    std::span<const StreamPoint> data, const ConstraintSet& set, const LossSpec& loss,
    const PrivacyBudget& budget, int iterations, Rng& rng) {
  if (data.empty()) throw InvalidInput("batch solver: empty dataset");
  const int d = set.dim();
  ErmObjective objective(data, loss, d);

  if (noise_disabled()) {
    if (loss.kind == LossKind::Hinge) {
      // No smooth path for hinge; fall through to the zero-noise schedule
      // below, which degenerates to plain projected subgradient descent.
    } else {
      return exact_minimizer(set, objective).theta;
    }
  }

  const int k = std::max(1, iterations);
  // Split (eps', delta'): delta_star = delta'/2 and per-step delta'/2k, then
  // solve 2k e^2 + sqrt(2k ln(2/delta')) e - eps' = 0 for the per-step e.
  double c = std::sqrt(2.0 * k * std::log(2.0 / budget.delta));
  double eps_step = (-c + std::sqrt(c * c + 8.0 * k * budget.epsilon)) / (4.0 * k);
  double delta_step = budget.delta / (2.0 * k);
  PrivacyBudget step_budget(eps_step, delta_step);
  SensitivityBound grad_sensitivity(2.0 * loss.lipschitz);

  double sigma = noise_disabled() ? 0.0 : std::sqrt(gaussian_noise_variance(grad_sensitivity, step_budget));
  double alpha = sigma * (std::sqrt(static_cast<double>(d)) + 2.0);
  double full_lipschitz = static_cast<double>(data.size()) * loss.lipschitz;

  GradientOracle oracle;
  oracle.alpha = alpha;
  oracle.lipschitz = full_lipschitz;
  oracle.eval = [&](const Eigen::VectorXd& theta) {
    return gaussian_mechanism(objective.gradient(theta), grad_sensitivity, step_budget, rng);
  };

  PgdConfig cfg;
  cfg.iterations = k;
  cfg.start = set.project(Eigen::VectorXd::Zero(d));
  return noisy_projected_gradient(set, oracle, cfg);
}

struct IncErmConfig {
  int T = 0;
  PrivacyBudget budget{1.0, 1e-6};
  int tau = 1;
  BatchSolverSpec solver;
  std::uint64_t seed = 0;
};

struct IncErmResult {
  std::vector<Eigen::VectorXd> outputs;       // theta_t for t = 1..T
  BudgetLedger ledger;
  PrivacyBudget per_call{1.0, 1e-6};          // (eps', delta') charged per checkpoint
  std::vector<int> failed_checkpoints;        // t where the solver threw
};

// The batch-to-incremental transformation: hold the last estimate, and at
// every t divisible by tau invoke the private batch solver on the full
// prefix under the per-call budget from split_for_inc_erm. Outputs are
// piecewise constant with breakpoints exactly at multiples of tau; the total
// charge composes to at most (eps, delta).
inline IncErmResult run_inc_erm(std::span<const StreamPoint> stream, const ConstraintSet& set,
                                const LossSpec& loss, const IncErmConfig& config,
                                BatchSolverFn solver = {}) {
  if (config.T < 1 || static_cast<int>(stream.size()) < config.T)
    throw InvalidInput("run_inc_erm: stream shorter than declared T");
  if (config.tau < 1) throw InvalidInput("run_inc_erm: tau must be >= 1");

  IncErmResult result;
  result.per_call = split_for_inc_erm(config.budget, config.T, std::min(config.tau, config.T));
  Rng rng = Rng(config.seed).substream(3);

  if (!solver) {
    int iterations = config.solver.iterations;
    solver = [iterations](std::span<const StreamPoint> data, const ConstraintSet& c,
                          const LossSpec& l, const PrivacyBudget& b, Rng& r) {
      return batch_solver_gradient_perturbation(data, c, l, b, iterations, r);
    };
  }

  Eigen::VectorXd theta = set.project(Eigen::VectorXd::Zero(set.dim()));
  result.outputs.reserve(config.T);
  for (int t = 1; t <= config.T; ++t) {
    if (t % config.tau == 0) {
      // The budget is spent the moment the solver touches the data, so the
      // charge stands even if the solve fails.
      result.ledger.charge(result.per_call.epsilon, result.per_call.delta,
                           "batch_erm@t=" + std::to_string(t));
      try {
        theta = solver(stream.subspan(0, t), set, loss, result.per_call, rng);
      } catch (const Error&) {
        result.failed_checkpoints.push_back(t);
      }
    }
    result.outputs.push_back(theta);
  }
  return result;
}

}  // namespace streamdp

#endif  // STREAMDP_INC_ERM_HPP
