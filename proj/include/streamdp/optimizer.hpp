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

#ifndef STREAMDP_OPTIMIZER_HPP
#define STREAMDP_OPTIMIZER_HPP

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Core>

#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/losses.hpp"

namespace streamdp {

// A gradient evaluator whose output may deviate from the true gradient by at
// most `alpha` in Euclidean norm, uniformly over the constraint set (with the
// caller's probability). `lipschitz` bounds the true gradient norm.
struct GradientOracle {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
  double alpha = 0.0;
  double lipschitz = 0.0;
};

struct PgdConfig {
  int iterations = 1;      // r
  double step = 0.0;       // 0 selects ||C|| / (sqrt(r) * (alpha + L))
  Eigen::VectorXd start;   // must lie in C
};

inline constexpr int kDefaultIterationCap = 1'000'000;

// Iteration count r = ceil((1 + L/alpha')^2) that balances the averaging
// error against the oracle error, clamped to [1, cap].
inline int default_iterations(double alpha_prime, double lipschitz,
                              int cap = kDefaultIterationCap) {
  if (!(alpha_prime > 0))
    throw InvalidInput("default_iterations: alpha' must be positive; supply r explicitly otherwise");
  double ratio = 1.0 + lipschitz / alpha_prime;
  double r = std::ceil(ratio * ratio);
  if (r >= static_cast<double>(cap)) return cap;
  return std::max(1, static_cast<int>(r));
}

// Projected gradient descent against an approximate gradient oracle:
//   theta_{k+1} = P_C(theta_k - eta * g(theta_k)),
// returning the average of the first r iterates (the start point counts as
// iterate one). Every iterate is feasible. With the default step size
// ||C||/(sqrt(r)(alpha+L)) the averaged point satisfies
//   f(avg) - f(opt) <= (alpha + L)||C||/sqrt(r) + alpha*||C||
// whenever the oracle honors its error bound.
inline Eigen::VectorXd noisy_projected_gradient(const ConstraintSet& set,
                                                const GradientOracle& oracle,
                                                const PgdConfig& cfg) {
  if (cfg.iterations < 1) throw InvalidInput("pgd: iterations must be >= 1");
  if (cfg.start.size() != set.dim()) throw InvalidInput("pgd: start dimension mismatch");
  if (!set.contains(cfg.start, 1e-7 * set.diameter()))
    throw InvalidInput("pgd: start point not in the constraint set");

  const int r = cfg.iterations;
  double eta = cfg.step;
  if (eta <= 0.0) {
    double denom = std::sqrt(static_cast<double>(r)) * (oracle.alpha + oracle.lipschitz);
    eta = denom > 0 ? set.diameter() / denom : 0.0;
  }

  Eigen::VectorXd theta = set.project(cfg.start);
  Eigen::VectorXd sum = theta;
  // theta_2 .. theta_r need r - 1 updates; the average excludes theta_{r+1}.
  for (int k = 1; k < r; ++k) {
    Eigen::VectorXd g = oracle.eval(theta);
    if (!g.allFinite()) throw NumericalFailure("pgd: non-finite gradient at iteration " + std::to_string(k));
    theta = set.project(theta - eta * g);
    sum += theta;
  }
  return sum / static_cast<double>(r);
}

struct MinimizeOptions {
  long max_iterations = 1'000'000;
  double gradient_mapping_tol = 1e-8;
  double relative_gap_tol = 1e-7;   // on the Frank-Wolfe style duality gap
  Eigen::VectorXd start;            // optional; projected if given
};

struct MinimizeResult {
  Eigen::VectorXd theta;
  double risk = 0.0;
  bool converged = false;
  long iterations = 0;
  double gap = std::numeric_limits<double>::infinity();
};

// Constrained empirical risk minimization with exact gradients, used as the
// non-private baseline. Accelerated projected gradient with function-value
// restarts; stops on the duality-gap certificate
//   f(theta) - f(opt) <= <grad, theta> + sup_{z in C} <-grad, z> = gap
// or on a small gradient mapping. Hinge loss is nonsmooth and not supported
// here.
inline MinimizeResult exact_minimizer(const ConstraintSet& set, const ErmObjective& objective,
                                      const MinimizeOptions& options = {}) {
  if (objective.loss().kind == LossKind::Hinge)
    throw Unsupported("exact_minimizer: hinge loss is nonsmooth; no certificate available");

  MinimizeResult result;
  Eigen::VectorXd x = options.start.size() == set.dim()
                          ? set.project(options.start)
                          : set.project(Eigen::VectorXd::Zero(set.dim()));
  if (objective.size() == 0 && objective.value(x) == 0.0 && objective.gradient(x).norm() == 0.0) {
    // Empty dataset: every feasible point is optimal.
    result.theta = x;
    result.risk = 0.0;
    result.converged = true;
    result.gap = 0.0;
    return result;
  }

  double smooth = objective.smoothness();
  if (!(smooth > 0) || !std::isfinite(smooth)) {
    if (smooth == 0.0) {  // constant objective
      result.theta = x;
      result.risk = objective.value(x);
      result.converged = true;
      result.gap = 0.0;
      return result;
    }
    throw NumericalFailure("exact_minimizer: unusable smoothness bound");
  }
  // The smoothness bound comes from a power iteration that converges from
  // below; the 1.05 keeps the step strictly inside the stable range.
  double step = 1.0 / (1.05 * smooth);

  Eigen::VectorXd z = x;  // extrapolation point
  double momentum = 1.0;
  double fx = objective.value(x);
  auto gap_at = [&](const Eigen::VectorXd& point, const Eigen::VectorXd& grad) {
    return grad.dot(point) + set.support(-grad);
  };

  for (long it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd grad_z = objective.gradient(z);
    Eigen::VectorXd x_next = set.project(z - step * grad_z);
    double fx_next = objective.value(x_next);

    if (fx_next > fx) {
      // Restart the momentum sequence from the best point.
      z = x;
      momentum = 1.0;
      grad_z = objective.gradient(z);
      x_next = set.project(z - step * grad_z);
      fx_next = objective.value(x_next);
    }

    double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    z = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x);
    momentum = momentum_next;
    x = x_next;
    fx = fx_next;
    result.iterations = it + 1;

    if ((it & 15) == 15 || it + 1 == options.max_iterations) {
      Eigen::VectorXd grad_x = objective.gradient(x);
      double gap = gap_at(x, grad_x);
      double mapping = (x - set.project(x - step * grad_x)).norm() / step;
      result.gap = gap;
      if (gap <= options.relative_gap_tol * std::max(1.0, std::abs(fx)) ||
          mapping < options.gradient_mapping_tol) {
        result.converged = true;
        break;
      }
    }
  }

  result.theta = x;
  result.risk = fx;
  return result;
}

// Convenience overload building the objective from raw data.
inline MinimizeResult exact_minimizer(const ConstraintSet& set,
                                      std::span<const StreamPoint> data, const LossSpec& loss,
                                      const MinimizeOptions& options = {}) {
  ErmObjective objective(data, loss, set.dim());
  return exact_minimizer(set, objective, options);
}

}  // namespace streamdp

#endif  // STREAMDP_OPTIMIZER_HPP
