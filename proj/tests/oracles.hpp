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

// Independent reference implementations used only by tests. Each deliberately
// takes a different algorithmic route than the library so agreement is
// evidence, not tautology.

#ifndef STREAMDP_TESTS_ORACLES_HPP
#define STREAMDP_TESTS_ORACLES_HPP

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "streamdp/stream.hpp"

namespace oracles {

// L1-ball projection by bisection on the soft-threshold level (no sorting).
inline Eigen::VectorXd l1_project_bisection(const Eigen::VectorXd& v, double radius) {
  auto shrunk_norm = [&](double tau) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::max(std::abs(v[i]) - tau, 0.0);
    return acc;
  };
  if (shrunk_norm(0.0) <= radius) return v;
  double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (shrunk_norm(mid) > radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double tau = 0.5 * (lo + hi);
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double mag = std::max(std::abs(v[i]) - tau, 0.0);
    out[i] = v[i] >= 0 ? mag : -mag;
  }
  return out;
}

// Exact minimizer of theta^T A theta + b^T theta over ||theta|| <= radius via
// the secular equation on the constraint multiplier (eigendecomposition of A,
// then 1-d root finding). A must be symmetric positive semidefinite.
inline Eigen::VectorXd quadratic_l2ball_minimizer(const Eigen::MatrixXd& A,
                                                  const Eigen::VectorXd& b, double radius) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  Eigen::VectorXd lambda = eig.eigenvalues();
  Eigen::VectorXd c = eig.eigenvectors().transpose() * b;  // rotated linear term

  auto norm_at = [&](double mu) {
    // Stationarity of the Lagrangian: (2A + 2 mu I) theta = -b.
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      double denom = 2.0 * (lambda[i] + mu);
      acc += (c[i] * c[i]) / (denom * denom);
    }
    return std::sqrt(acc);
  };

  double shift = std::max(0.0, -lambda.minCoeff()) + 1e-12;
  if (norm_at(shift) <= radius && shift <= 1e-10) {
    Eigen::VectorXd y(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) y[i] = -c[i] / (2.0 * (lambda[i] + shift));
    return eig.eigenvectors() * y;
  }
  double lo = shift, hi = std::max(1.0, shift);
  while (norm_at(hi) > radius) hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double mu = 0.5 * (lo + hi);
  Eigen::VectorXd y(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) y[i] = -c[i] / (2.0 * (lambda[i] + mu));
  return eig.eigenvectors() * y;
}

// Central finite differences of a scalar function.
template <typename F>
Eigen::VectorXd finite_difference_gradient(F&& f, const Eigen::VectorXd& theta, double h = 1e-5) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd hi = theta, lo = theta;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Empirical squared-loss risk by direct summation.
inline double empirical_risk(std::span<const streamdp::StreamPoint> prefix,
                             const Eigen::VectorXd& theta) {
  double acc = 0.0;
  for (const auto& z : prefix) {
    double r = z.y - z.x.dot(theta);
    acc += r * r;
  }
  return acc;
}

// Brute-force prefix sums of a vector stream.
inline std::vector<Eigen::VectorXd> prefix_sums(const std::vector<Eigen::VectorXd>& stream) {
  std::vector<Eigen::VectorXd> sums;
  sums.reserve(stream.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(stream.empty() ? 0 : stream.front().size());
  for (const auto& v : stream) {
    acc += v;
    sums.push_back(acc);
  }
  return sums;
}

inline double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  double rank = p * (values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(rank);
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = rank - lo;
  return values[lo] * (1 - frac) + values[hi] * frac;
}

}  // namespace oracles

#endif  // STREAMDP_TESTS_ORACLES_HPP
