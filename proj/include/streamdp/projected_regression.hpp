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

#ifndef STREAMDP_PROJECTED_REGRESSION_HPP
#define STREAMDP_PROJECTED_REGRESSION_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/inc_regression.hpp"
#include "streamdp/optimizer.hpp"
#include "streamdp/stream.hpp"
#include "streamdp/tree_mechanism.hpp"

namespace streamdp {

// Gaussian random projection drawn once per run, before any data is read.
// gamma = W^{1/3} / T^{1/3} and m = ceil(c_m * max{W^2, ln(T/beta)} / gamma^2)
// with W the sum of the widths of the covariate domain and the constraint
// set.
struct ProjectionSpec {
  Eigen::MatrixXd Phi;  // m x d, entries i.i.d. N(0, 1/m)
  int m = 0;
  double gamma = 0.0;
  double width_sum = 0.0;

  static int target_dim(int T, double width_sum, double beta, double c_m) {
    double gamma = std::pow(width_sum, 1.0 / 3.0) / std::pow(static_cast<double>(T), 1.0 / 3.0);
    double need = std::max(width_sum * width_sum, std::log(T / beta));
    return std::max(1, static_cast<int>(std::ceil(c_m * need / (gamma * gamma))));
  }

  static ProjectionSpec draw(int d, int T, double width_sum, double beta, double c_m, Rng& rng) {
    if (!(width_sum > 0)) throw InvalidInput("projection: width sum must be positive");
    ProjectionSpec spec;
    spec.width_sum = width_sum;
    spec.gamma = std::pow(width_sum, 1.0 / 3.0) / std::pow(static_cast<double>(T), 1.0 / 3.0);
    spec.m = target_dim(T, width_sum, beta, c_m);
    spec.Phi = Eigen::MatrixXd(spec.m, d);
    double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
    for (int i = 0; i < spec.m; ++i)
      for (int j = 0; j < d; ++j) spec.Phi(i, j) = scale * rng.gaussian();
    return spec;
  }
};

// Rescales x so that ||Phi x~|| = ||x|| exactly (direction preserved), which
// pins the sensitivity of the projected outer-product stream at 2.
inline Eigen::VectorXd scale_covariate(const Eigen::VectorXd& x, const Eigen::MatrixXd& Phi) {
  if (x.size() != Phi.cols()) throw InvalidInput("scale_covariate: dimension mismatch");
  double xn = x.norm();
  if (xn == 0.0) throw InvalidInput("scale_covariate: zero covariate");
  double pn = (Phi * x).norm();
  if (pn <= 1e-12 * xn)
    throw DegenerateProjection("scale_covariate: projected covariate is numerically null");
  return (xn / pn) * x;
}

struct EmbeddingReport {
  int pairs = 0;
  int violations = 0;
  double fraction = 0.0;
  double gamma = 0.0;
  double max_relative_distortion = 0.0;
};

// Diagnostic: fraction of sampled pairs whose inner product is distorted by
// more than gamma * ||a|| * ||b|| under Phi. Uses public geometry only, so it
// costs no privacy.
inline EmbeddingReport embedding_check(const Eigen::MatrixXd& Phi,
                                       std::span<const Eigen::VectorXd> sample, double gamma) {
  EmbeddingReport report;
  report.gamma = gamma;
  std::vector<Eigen::VectorXd> projected;
  projected.reserve(sample.size());
  for (const auto& a : sample) projected.push_back(Phi * a);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = i; j < sample.size(); ++j) {
      double truth = sample[i].dot(sample[j]);
      double mapped = projected[i].dot(projected[j]);
      double scale = sample[i].norm() * sample[j].norm();
      if (scale <= 0) continue;
      ++report.pairs;
      double rel = std::abs(mapped - truth) / scale;
      report.max_relative_distortion = std::max(report.max_relative_distortion, rel);
      if (rel > gamma) ++report.violations;
    }
  }
  report.fraction = report.pairs > 0 ? static_cast<double>(report.violations) / report.pairs : 0.0;
  return report;
}

struct LiftOptions {
  int max_alternations = 500;  // per probed gauge level
  int bisection_steps = 40;
  double residual_tol_rel = 1e-6;  // times the set diameter
};

// Solves min ||theta||_C subject to Phi theta = target, by bisection on the
// gauge level with alternating projections between the scaled body and the
// affine fiber. The affine projection reuses one Cholesky factor of
// Phi Phi^T for the whole run. For m >= d the fiber is a single point and
// the solve is direct.
class GaugeLifter {
 public:
  using Options = LiftOptions;

  struct Result {
    Eigen::VectorXd theta;
    double residual = 0.0;
    double gauge = 0.0;
  };

  GaugeLifter(const ConstraintSet& set, Eigen::MatrixXd Phi, LiftOptions options = {})
      : set_(set), Phi_(std::move(Phi)), options_(options) {
    if (set.kind() == SetKind::Simplex)
      throw Unsupported("lift: gauge minimization needs a symmetric body");
    if (Phi_.cols() != set.dim()) throw InvalidInput("lift: projection dimension mismatch");
    wide_ = Phi_.rows() < Phi_.cols();
    if (wide_) {
      gram_llt_.compute(Phi_ * Phi_.transpose());
    } else {
      tall_llt_.compute(Phi_.transpose() * Phi_);
    }
    if ((wide_ && gram_llt_.info() != Eigen::Success) ||
        (!wide_ && tall_llt_.info() != Eigen::Success))
      throw NumericalFailure("lift: projection matrix is rank deficient");
  }

  // `warm`, when it already satisfies Phi*warm = target (the caller holds a
  // known preimage), doubles as a guaranteed-feasible fallback: the search
  // can then only improve its gauge, never exceed it.
  Result lift(const Eigen::VectorXd& target, const Eigen::VectorXd* warm = nullptr,
              double gauge_hint = 1.0) const {
    if (target.size() != Phi_.rows()) throw InvalidInput("lift: target dimension mismatch");
    const double diam = set_.diameter();
    const double tol = options_.residual_tol_rel * diam;
    best_probe_gap_ = std::numeric_limits<double>::infinity();

    if (target.norm() <= tol * 1e-3) {
      // Zero is feasible with gauge zero.
      return {Eigen::VectorXd::Zero(set_.dim()), target.norm(), 0.0};
    }

    if (!wide_) {
      // Overdetermined fiber: the preimage is unique, gauge minimization is
      // vacuous.
      Eigen::VectorXd theta = tall_llt_.solve(Phi_.transpose() * target);
      double residual = (Phi_ * theta - target).norm();
      if (residual > tol)
        throw LiftFailure("lift: target outside the projection range", residual);
      return {theta, residual, set_.gauge(theta)};
    }

    Result best;
    bool have_feasible = false;
    double hi = std::max(gauge_hint, 1e-12);
    Eigen::VectorXd anchor = to_fiber(Eigen::VectorXd::Zero(set_.dim()), target);
    if (warm != nullptr && warm->size() == set_.dim()) {
      double warm_residual = (Phi_ * *warm - target).norm();
      if (warm_residual <= tol) {
        best = {*warm, warm_residual, set_.gauge(*warm)};
        have_feasible = true;
        hi = std::min(hi, best.gauge);
      }
      anchor = to_fiber(*warm, target);
    }

    if (!have_feasible) {
      have_feasible = probe(hi, target, anchor, &best);
      double best_unmet = best_probe_gap_;
      for (int grow = 0; grow < 8 && !have_feasible; ++grow) {
        // The hint may have been optimistic (or the probe budget too
        // tight); relax upward before declaring failure.
        hi *= 2.0;
        have_feasible = probe(hi, target, anchor, &best);
        best_unmet = std::min(best_unmet, best_probe_gap_);
      }
      if (!have_feasible)
        throw LiftFailure("lift: no feasible gauge level found", best_unmet);
      hi = best.gauge;
    }

    double lo = 0.0;
    Eigen::VectorXd warm_iter = best.theta;
    for (int step = 0; step < options_.bisection_steps; ++step) {
      double mid = 0.5 * (lo + hi);
      Result candidate;
      if (probe(mid, target, warm_iter, &candidate)) {
        hi = std::min(mid, candidate.gauge);
        best = candidate;
        warm_iter = candidate.theta;
      } else {
        lo = mid;
      }
      if (hi - lo <= 1e-4 * std::max(hi, 1e-12)) break;
    }
    return best;
  }

  const Eigen::MatrixXd& projection() const { return Phi_; }

 private:
  // Orthogonal projection of v onto { theta : Phi theta = target }.
  Eigen::VectorXd to_fiber(const Eigen::VectorXd& v, const Eigen::VectorXd& target) const {
    return v - Phi_.transpose() * gram_llt_.solve(Phi_ * v - target);
  }

  // Alternating projections at gauge level rho. Success means a fiber point
  // whose gauge is within kGaugeSlack of rho was reached, so the deliverable
  // always satisfies the gauge postcondition directly (the fiber residual is
  // exact up to the factor solve). Infeasible levels are detected early when
  // the feasibility gap plateaus above zero.
  bool probe(double rho, const Eigen::VectorXd& target, const Eigen::VectorXd& start,
             Result* out) const {
    static constexpr double kGaugeSlack = 5e-7;
    ConstraintSet body = set_.scaled(rho);
    Eigen::VectorXd theta = to_fiber(start, target);
    double stall_reference = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options_.max_alternations; ++it) {
      double gauge = set_.gauge(theta);
      if (gauge <= rho + kGaugeSlack) {
        out->theta = theta;
        out->residual = (Phi_ * theta - target).norm();
        out->gauge = gauge;
        return true;
      }
      Eigen::VectorXd inside = body.project(theta);
      double gap = (theta - inside).norm();
      best_probe_gap_ = std::min(best_probe_gap_, gap);
      if ((it & 31) == 31) {
        if (gap >= stall_reference * (1.0 - 1e-3)) break;  // plateaued above zero
        stall_reference = gap;
      }
      Eigen::VectorXd next = to_fiber(inside, target);
      if ((next - theta).norm() <= 1e-14 * std::max(1.0, theta.norm())) {
        break;  // stalled strictly outside the body
      }
      theta = next;
    }
    return false;
  }

  ConstraintSet set_;
  Eigen::MatrixXd Phi_;
  Options options_;
  bool wide_ = false;
  Eigen::LLT<Eigen::MatrixXd> gram_llt_;  // Phi Phi^T (m < d)
  Eigen::LLT<Eigen::MatrixXd> tall_llt_;  // Phi^T Phi (m >= d)
  mutable double best_probe_gap_ = std::numeric_limits<double>::infinity();
};

// Uniform-access membership filter: points outside the good domain are
// replaced by (0, 0) rather than skipped, so the downstream mechanisms see
// one input per timestep regardless of membership.
inline StreamPoint membership_filter(const StreamPoint& z,
                                     const std::function<bool(const Eigen::VectorXd&)>& in_domain) {
  if (in_domain(z.x)) return z;
  return {Eigen::VectorXd::Zero(z.x.size()), 0.0};
}

struct ProjIncRegParams {
  double eps_tree = 0.0;
  double delta_tree = 0.0;
  double kappa = 0.0;
  double alpha_prime = 0.0;
  int iterations = 0;
  double gamma = 0.0;
  int m = 0;
  double width_sum = 0.0;
};

struct ProjStepOutput {
  Eigen::VectorXd theta;
  double lift_residual = 0.0;
  bool flagged = false;       // optimizer failure, previous output re-emitted
  bool skipped = false;       // degenerate projection, zeros were fed
};

// Compressed private incremental least squares: covariates are rescaled and
// pushed through a fixed Gaussian projection; two tree mechanisms privatize
// the m-dimensional moment sums; projected gradient descent runs over the
// image of the constraint set (realized through a mirror point kept in the
// original space); the gauge-minimizing lift maps each output back into C.
class ProjPrivIncRegRun {
 public:
  ProjPrivIncRegRun(const ConstraintSet& set, int T, const PrivacyBudget& budget, double beta,
                    double width_domain, double width_constraint, std::uint64_t seed,
                    RunConstants constants = {}, IngestPolicy ingest = IngestPolicy::Reject,
                    std::function<bool(const Eigen::VectorXd&)> membership = {})
      : ProjPrivIncRegRun(set, T, budget, beta,
                          draw_projection(set.dim(), T, width_domain + width_constraint, beta,
                                          constants.c_m, seed),
                          seed, constants, ingest, std::move(membership)) {}

  // Variant with a caller-supplied projection (it must predate the data).
  ProjPrivIncRegRun(const ConstraintSet& set, int T, const PrivacyBudget& budget, double beta,
                    ProjectionSpec projection, std::uint64_t seed, RunConstants constants = {},
                    IngestPolicy ingest = IngestPolicy::Reject,
                    std::function<bool(const Eigen::VectorXd&)> membership = {})
      : set_(set),
        T_(T),
        d_(set.dim()),
        ingest_(ingest),
        membership_(std::move(membership)),
        projection_(std::move(projection)),
        // Per-timestep lifts are seeded with an exact preimage, so a tighter
        // search budget only trades a hair of gauge minimality for
        // throughput; standalone lifts keep the full default budget.
        lifter_(set, projection_.Phi,
                LiftOptions{.max_alternations = 120, .bisection_steps = 10}),
        q_tree_(T, projection_.m, PrivacyBudget(budget.epsilon / 2, budget.delta / 2),
                SensitivityBound(2.0), Rng(seed).substream(1)),
        Q_tree_(T, projection_.m * projection_.m,
                PrivacyBudget(budget.epsilon / 2, budget.delta / 2), SensitivityBound(2.0),
                Rng(seed).substream(2)) {
    if (set.kind() == SetKind::Simplex)
      throw Unsupported("proj_priv_inc_reg: lifting needs a symmetric body");
    if (!(beta > 0) || !(beta < 1)) throw InvalidInput("proj_priv_inc_reg: beta must be in (0, 1)");
    params_.eps_tree = budget.epsilon / 2;
    params_.delta_tree = budget.delta / 2;
    params_.kappa = detail::tree_error_scale(T, params_.eps_tree, params_.delta_tree);
    params_.gamma = projection_.gamma;
    params_.m = projection_.m;
    params_.width_sum = projection_.width_sum;
    double diam = set.diameter();
    params_.alpha_prime =
        constants.c_alpha * params_.kappa * diam * std::sqrt(static_cast<double>(params_.m));
    params_.iterations =
        default_iterations(params_.alpha_prime, T * diam, constants.iteration_cap);
    ledger_.charge(params_.eps_tree, params_.delta_tree, "tree:q");
    ledger_.charge(params_.eps_tree, params_.delta_tree, "tree:Q");
    pinv_wide_ = projection_.Phi.rows() < projection_.Phi.cols();
    pinv_llt_.compute(pinv_wide_
                          ? Eigen::MatrixXd(projection_.Phi * projection_.Phi.transpose())
                          : Eigen::MatrixXd(projection_.Phi.transpose() * projection_.Phi));
    if (pinv_llt_.info() != Eigen::Success)
      throw NumericalFailure("proj_priv_inc_reg: projection matrix is rank deficient");
    mirror_ = set.project(Eigen::VectorXd::Zero(d_));
    theta_ = mirror_;
  }

  ProjStepOutput step(const StreamPoint& raw) {
    ProjStepOutput out;
    bool clipped = false;
    StreamPoint z = ingest_point(raw, ingest_, &clipped);
    clip_count_ += clipped ? 1 : 0;
    if (z.x.size() != d_) throw InvalidInput("proj_priv_inc_reg: covariate dimension mismatch");
    if (membership_) z = membership_filter(z, membership_);

    Eigen::VectorXd projected = Eigen::VectorXd::Zero(params_.m);
    if (z.x.norm() > 0) {
      try {
        Eigen::VectorXd scaled = scale_covariate(z.x, projection_.Phi);
        projected = projection_.Phi * scaled;
      } catch (const DegenerateProjection&) {
        out.skipped = true;  // feed zeros; the access pattern stays uniform
        ++skip_count_;
      }
    }

    Eigen::VectorXd q = q_tree_.step(z.y * projected);
    Eigen::MatrixXd outer = projected * projected.transpose();
    Eigen::VectorXd Q_flat =
        Q_tree_.step(Eigen::Map<const Eigen::VectorXd>(outer.data(), params_.m * params_.m));
    Eigen::MatrixXd Q = Eigen::Map<const Eigen::MatrixXd>(Q_flat.data(), params_.m, params_.m);
    gradient_fn_.Q = 0.5 * (Q + Q.transpose());
    gradient_fn_.q = q;
    ++t_;

    try {
      if (noise_disabled()) {
        // Exact released moments: minimize the projected quadratic over the
        // mirror variable to convergence.
        Eigen::MatrixXd pulled_Q =
            projection_.Phi.transpose() * gradient_fn_.Q * projection_.Phi;
        Eigen::VectorXd pulled_q = projection_.Phi.transpose() * gradient_fn_.q;
        mirror_ = detail::minimize_quadratic(set_, 0.5 * (pulled_Q + pulled_Q.transpose()),
                                             pulled_q, mirror_);
      } else {
        // Descent over the image of C, realized through the mirror point:
        // the gradient step happens on the image variable and is carried
        // back along the minimum-norm preimage, so the low-dimensional
        // noise is not re-inflated; projecting the mirror onto C keeps the
        // image inside Phi*C.
        GradientOracle oracle;
        oracle.alpha = params_.alpha_prime;
        oracle.lipschitz = 2.0 * t_ * (1.0 + set_.diameter());
        oracle.eval = [this](const Eigen::VectorXd& mu) {
          return pseudo_inverse_pullback(gradient_fn_(projection_.Phi * mu));
        };
        PgdConfig cfg;
        cfg.iterations = params_.iterations;
        cfg.start = mirror_;
        mirror_ = noisy_projected_gradient(set_, oracle, cfg);
      }
      Eigen::VectorXd target = projection_.Phi * mirror_;
      // The mirror point is an exact preimage of the target, so the lift can
      // only improve on its gauge and never returns an infeasible point.
      GaugeLifter::Result lifted = lifter_.lift(target, &mirror_, 1.0);
      theta_ = lifted.theta;
      out.lift_residual = lifted.residual;
    } catch (const NumericalFailure&) {
      out.flagged = true;
    } catch (const LiftFailure& e) {
      out.flagged = true;
      out.lift_residual = e.best_residual();
    }
    out.theta = theta_;
    return out;
  }

  int t() const { return t_; }
  const ProjIncRegParams& params() const { return params_; }
  const BudgetLedger& ledger() const { return ledger_; }
  const ProjectionSpec& projection() const { return projection_; }
  const PrivateGradientFn& gradient_fn() const { return gradient_fn_; }
  int skip_count() const { return skip_count_; }
  int clip_count() const { return clip_count_; }

 private:
  // The projection is drawn from the master seed (substream 0) before any
  // data-dependent randomness is consumed.
  static ProjectionSpec draw_projection(int d, int T, double width_sum, double beta, double c_m,
                                        std::uint64_t seed) {
    Rng rng = Rng(seed).substream(0);
    return ProjectionSpec::draw(d, T, width_sum, beta, c_m, rng);
  }

  // Minimum-norm preimage of an image-space direction:
  // Phi * pullback(g) = g exactly (m < d), least squares otherwise.
  Eigen::VectorXd pseudo_inverse_pullback(const Eigen::VectorXd& g) const {
    if (pinv_wide_) return projection_.Phi.transpose() * pinv_llt_.solve(g);
    return pinv_llt_.solve(projection_.Phi.transpose() * g);
  }

  ConstraintSet set_;
  int T_;
  int d_;
  int t_ = 0;
  IngestPolicy ingest_;
  std::function<bool(const Eigen::VectorXd&)> membership_;
  ProjectionSpec projection_;
  GaugeLifter lifter_;
  TreeMechanism q_tree_;
  TreeMechanism Q_tree_;
  ProjIncRegParams params_;
  BudgetLedger ledger_;
  PrivateGradientFn gradient_fn_;
  Eigen::LLT<Eigen::MatrixXd> pinv_llt_;
  bool pinv_wide_ = false;
  Eigen::VectorXd mirror_;
  Eigen::VectorXd theta_;
  int skip_count_ = 0;
  int clip_count_ = 0;
};

struct ProjIncRegResult {
  std::vector<Eigen::VectorXd> outputs;
  std::vector<double> lift_residuals;
  std::vector<bool> flagged;
  ProjIncRegParams params;
  BudgetLedger ledger;
};

inline ProjIncRegResult run_proj_priv_inc_reg(
    std::span<const StreamPoint> stream, const ConstraintSet& set, const PrivacyBudget& budget,
    double beta, double width_domain, double width_constraint, std::uint64_t seed,
    RunConstants constants = {}, IngestPolicy ingest = IngestPolicy::Reject,
    std::function<bool(const Eigen::VectorXd&)> membership = {}) {
  ProjPrivIncRegRun run(set, static_cast<int>(stream.size()), budget, beta, width_domain,
                        width_constraint, seed, constants, ingest, std::move(membership));
  ProjIncRegResult result;
  for (const auto& z : stream) {
    ProjStepOutput out = run.step(z);
    result.outputs.push_back(out.theta);
    result.lift_residuals.push_back(out.lift_residual);
    result.flagged.push_back(out.flagged);
  }
  result.params = run.params();
  result.ledger = run.ledger();
  return result;
}

}  // namespace streamdp

#endif  // STREAMDP_PROJECTED_REGRESSION_HPP
