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

#ifndef STREAMDP_LOSSES_HPP
#define STREAMDP_LOSSES_HPP

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/stream.hpp"

namespace streamdp {

enum class LossKind { Squared, Logistic, Hinge };

// Per-point convex loss together with the constants the incremental
// mechanisms consume. `lipschitz` bounds the per-point gradient norm over
// the constraint set; `strong_convexity` and `curvature` parameterize the
// refresh-interval policies for losses that have them.
struct LossSpec {
  LossKind kind = LossKind::Squared;
  double lipschitz = 0.0;
  double strong_convexity = 0.0;
  double curvature = 0.0;

  // Least squares on normalized data: |y - <x, theta>| <= 1 + ||C|| and
  // ||x|| <= 1 give the per-point gradient bound 2(1 + ||C||). The curvature
  // constant is bounded by ||C||^2.
  static LossSpec squared(const ConstraintSet& set) {
    double diam = set.diameter();
    return {LossKind::Squared, 2.0 * (1.0 + diam), 0.0, diam * diam};
  }

  static LossSpec logistic(const ConstraintSet& set) {
    (void)set;  // gradient bound ||x|| <= 1 does not involve the set
    return {LossKind::Logistic, 1.0, 0.0, 0.25};
  }

  static LossSpec hinge(const ConstraintSet& set) {
    (void)set;
    return {LossKind::Hinge, 1.0, 0.0, 0.0};
  }

  double value(const Eigen::VectorXd& theta, const StreamPoint& z) const {
    double margin = z.x.dot(theta);
    switch (kind) {
      case LossKind::Squared: {
        double r = z.y - margin;
        return r * r;
      }
      case LossKind::Logistic: {
        // log(1 + exp(-y*m)) evaluated stably.
        double a = -z.y * margin;
        return a > 30 ? a : std::log1p(std::exp(a));
      }
      case LossKind::Hinge:
        return std::max(0.0, 1.0 - z.y * margin);
    }
    return 0.0;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const StreamPoint& z) const {
    double margin = z.x.dot(theta);
    switch (kind) {
      case LossKind::Squared:
        return -2.0 * (z.y - margin) * z.x;
      case LossKind::Logistic: {
        double a = -z.y * margin;
        double sig = a > 30 ? 1.0 : std::exp(a) / (1.0 + std::exp(a));
        return (-z.y * sig) * z.x;
      }
      case LossKind::Hinge:
        return z.y * margin < 1.0 ? Eigen::VectorXd(-z.y * z.x)
                                  : Eigen::VectorXd(Eigen::VectorXd::Zero(theta.size()));
    }
    return Eigen::VectorXd::Zero(theta.size());
  }
};

// Empirical risk over a finite dataset: value, gradient, and a smoothness
// bound for step-size selection. The squared loss caches sufficient
// statistics so evaluations cost O(d^2) instead of O(n d).
class ErmObjective {
 public:
  ErmObjective(std::span<const StreamPoint> data, const LossSpec& loss, int dim)
      : data_(data), loss_(loss), dim_(dim) {
    if (loss.kind == LossKind::Squared) {
      gram_ = Eigen::MatrixXd::Zero(dim, dim);
      moment_ = Eigen::VectorXd::Zero(dim);
      offset_ = 0.0;
      for (const auto& z : data_) {
        gram_.noalias() += z.x * z.x.transpose();
        moment_ += z.y * z.x;
        offset_ += z.y * z.y;
      }
    }
  }

  // Quadratic form constructor for callers that already hold the sufficient
  // statistics (gram = sum x x^T, moment = sum x y, offset = sum y^2).
  ErmObjective(Eigen::MatrixXd gram, Eigen::VectorXd moment, double offset)
      : loss_{LossKind::Squared, 0, 0, 0},
        dim_(static_cast<int>(moment.size())),
        gram_(std::move(gram)),
        moment_(std::move(moment)),
        offset_(offset) {}

  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  const LossSpec& loss() const { return loss_; }

  double value(const Eigen::VectorXd& theta) const {
    if (loss_.kind == LossKind::Squared) {
      return theta.dot(gram_ * theta) - 2.0 * moment_.dot(theta) + offset_;
    }
    double acc = 0.0;
    for (const auto& z : data_) acc += loss_.value(theta, z);
    return acc;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    if (loss_.kind == LossKind::Squared) {
      return 2.0 * (gram_ * theta - moment_);
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
    for (const auto& z : data_) g += loss_.gradient(theta, z);
    return g;
  }

  // Upper bound on the gradient's Lipschitz constant; +inf for nonsmooth
  // losses.
  double smoothness() const {
    switch (loss_.kind) {
      case LossKind::Squared:
        return 2.0 * spectral_norm(gram_);
      case LossKind::Logistic: {
        double acc = 0.0;
        for (const auto& z : data_) acc += z.x.squaredNorm();
        return 0.25 * acc;
      }
      case LossKind::Hinge:
        return std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::infinity();
  }

 private:
  static double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 0.0;
    // Power iteration; a is symmetric PSD here.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd w = a * v;
      double n = w.norm();
      if (n <= 1e-300) return 0.0;
      v = w / n;
      double next = v.dot(a * v);
      if (std::abs(next - lambda) <= 1e-12 * std::max(1.0, next)) return next;
      lambda = next;
    }
    return lambda;
  }

  std::span<const StreamPoint> data_;
  LossSpec loss_;
  int dim_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  double offset_ = 0.0;
};

}  // namespace streamdp

#endif  // STREAMDP_LOSSES_HPP
