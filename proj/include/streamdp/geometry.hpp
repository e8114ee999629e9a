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

#ifndef STREAMDP_GEOMETRY_HPP
#define STREAMDP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "streamdp/errors.hpp"
#include "streamdp/rng.hpp"

namespace streamdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SetKind { L2Ball, L1Ball, Simplex, LpBall, GroupL12 };

namespace detail {

// Euclidean projection onto { z : ||z||_1 <= radius } by sorting and
// soft-thresholding at the dual multiplier.
inline Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  Vector abs = v.cwiseAbs();
  std::vector<double> sorted(abs.data(), abs.data() + abs.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] > candidate) {
      threshold = candidate;
    } else {
      break;
    }
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double mag = std::max(abs[i] - threshold, 0.0);
    out[i] = v[i] >= 0 ? mag : -mag;
  }
  return out;
}

// Euclidean projection onto the standard probability simplex.
inline Vector project_simplex(const Vector& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] > candidate) {
      threshold = candidate;
    } else {
      break;
    }
  }
  return (v.array() - threshold).max(0.0);
}

// Solves u + lambda*p*u^(p-1) = a for u in [0, a], a >= 0. Used per
// coordinate by the Lp-ball projection. Safeguarded Newton on a bracket.
inline double lp_coordinate_root(double a, double lambda, double p) {
  if (a <= 0.0) return 0.0;
  double lo = 0.0, hi = a;
  double u = a;  // h(a) = lambda*p*a^(p-1) > 0, so the root is below a
  for (int it = 0; it < 200; ++it) {
    double up1 = std::pow(u, p - 1.0);
    double h = u + lambda * p * up1 - a;
    if (std::abs(h) <= 1e-15 * std::max(1.0, a)) break;
    if (h > 0) {
      hi = u;
    } else {
      lo = u;
    }
    double hp = 1.0 + lambda * p * (p - 1.0) * (u > 0 ? std::pow(u, p - 2.0) : 0.0);
    double next = u - h / hp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-16 * std::max(1.0, a)) {
      u = next;
      break;
    }
    u = next;
  }
  return u;
}

// Euclidean projection onto { z : ||z||_p <= radius }, 1 < p < 2, via
// bisection on the Lagrange multiplier of the norm constraint.
inline Vector project_lp_ball(const Vector& v, double radius, double p) {
  Vector abs = v.cwiseAbs();
  if (std::pow(abs.array().pow(p).sum(), 1.0 / p) <= radius) return v;

  auto norm_at = [&](double lambda, Vector* out) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < abs.size(); ++i) {
      double u = lp_coordinate_root(abs[i], lambda, p);
      if (out != nullptr) (*out)[i] = u;
      acc += std::pow(u, p);
    }
    return std::pow(acc, 1.0 / p);
  };

  double lo = 0.0, hi = 1.0;
  while (norm_at(hi, nullptr) > radius) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) throw NumericalFailure("lp projection: multiplier bracket diverged");
  }
  Vector mags(abs.size());
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double n = norm_at(mid, &mags);
    if (std::abs(n - radius) <= 1e-10 * radius) break;
    if (n > radius) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }
  norm_at(0.5 * (lo + hi), &mags);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i] >= 0 ? mags[i] : -mags[i];
  return out;
}

inline double lp_norm(const Vector& v, double p) {
  if (p == 2.0) return v.norm();
  if (p == 1.0) return v.lpNorm<1>();
  return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

}  // namespace detail

// A closed convex constraint body, origin-symmetric except for the simplex.
// All the geometric primitives the optimization algorithms consume live
// here: Euclidean projection, Minkowski gauge, diameter (max attained
// Euclidean norm), and the support function sup_{a in C} <a, g>.
class ConstraintSet {
 public:
  static ConstraintSet l2_ball(int dim, double radius) {
    return ConstraintSet(SetKind::L2Ball, dim, radius, 2.0, 0);
  }
  static ConstraintSet l1_ball(int dim, double radius) {
    return ConstraintSet(SetKind::L1Ball, dim, radius, 1.0, 0);
  }
  static ConstraintSet simplex(int dim) {
    return ConstraintSet(SetKind::Simplex, dim, 1.0, 0.0, 0);
  }
  static ConstraintSet lp_ball(int dim, double radius, double p) {
    if (!(p >= 1.0 && p <= 2.0)) throw InvalidInput("lp_ball: p must be in [1, 2]");
    return ConstraintSet(SetKind::LpBall, dim, radius, p, 0);
  }
  // Ball of the block L1,2 norm with blocks of size `block` (last block may
  // be shorter).
  static ConstraintSet group_l12(int dim, double radius, int block) {
    if (block < 1 || block > dim) throw InvalidInput("group_l12: block size out of range");
    return ConstraintSet(SetKind::GroupL12, dim, radius, 0.0, block);
  }

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  double p() const { return p_; }
  int block() const { return block_; }

  // Same body scaled by rho > 0. Not defined for the simplex.
  ConstraintSet scaled(double rho) const {
    if (kind_ == SetKind::Simplex) throw Unsupported("scaled: simplex has no scaled variant here");
    if (!(rho > 0)) throw InvalidInput("scaled: rho must be positive");
    return ConstraintSet(kind_, dim_, radius_ * rho, p_, block_);
  }

  double diameter() const {
    // For every supported kind the maximum Euclidean norm is attained at a
    // (signed) basis vector, except the L2 ball where it is the radius.
    return kind_ == SetKind::Simplex ? 1.0 : radius_;
  }

  // Absolute feasibility tolerance used by contains(): 1e-9 relative to the
  // diameter.
  double feasibility_tol() const { return 1e-9 * diameter(); }

  Vector project(const Vector& v) const {
    check_dim(v);
    if (!v.allFinite()) throw InvalidInput("project: non-finite input");
    switch (kind_) {
      case SetKind::L2Ball: {
        double n = v.norm();
        return n <= radius_ ? v : Vector((radius_ / n) * v);
      }
      case SetKind::L1Ball:
        return detail::project_l1_ball(v, radius_);
      case SetKind::Simplex:
        return detail::project_simplex(v);
      case SetKind::LpBall:
        if (p_ == 2.0) return l2_ball(dim_, radius_).project(v);
        if (p_ == 1.0) return detail::project_l1_ball(v, radius_);
        return detail::project_lp_ball(v, radius_, p_);
      case SetKind::GroupL12: {
        Vector norms = block_norms(v);
        Vector shrunk = detail::project_l1_ball(norms, radius_);
        Vector out = v;
        for (int b = 0; b < norms.size(); ++b) {
          int lo = b * block_;
          int len = std::min(block_, dim_ - lo);
          double scale = norms[b] > 0 ? shrunk[b] / norms[b] : 0.0;
          out.segment(lo, len) *= scale;
        }
        return out;
      }
    }
    throw NumericalFailure("project: unreachable");
  }

  // Minkowski functional ||v||_C = inf { rho : v in rho*C }. A norm for the
  // symmetric kinds; undefined for the simplex.
  double gauge(const Vector& v) const {
    check_dim(v);
    switch (kind_) {
      case SetKind::L2Ball:
        return v.norm() / radius_;
      case SetKind::L1Ball:
        return v.lpNorm<1>() / radius_;
      case SetKind::LpBall:
        return detail::lp_norm(v, p_) / radius_;
      case SetKind::GroupL12:
        return block_norms(v).lpNorm<1>() / radius_;
      case SetKind::Simplex:
        throw Unsupported("gauge: not a norm for the simplex");
    }
    throw NumericalFailure("gauge: unreachable");
  }

  // Support function sup_{a in C} <a, g>; closed form per kind because the
  // supremum of a linear functional is attained at an extreme point.
  double support(const Vector& g) const {
    check_dim(g);
    switch (kind_) {
      case SetKind::L2Ball:
        return radius_ * g.norm();
      case SetKind::L1Ball:
        return radius_ * g.lpNorm<Eigen::Infinity>();
      case SetKind::Simplex:
        return g.maxCoeff();
      case SetKind::LpBall: {
        if (p_ == 1.0) return radius_ * g.lpNorm<Eigen::Infinity>();
        double q = p_ / (p_ - 1.0);
        return radius_ * detail::lp_norm(g, q);
      }
      case SetKind::GroupL12: {
        Vector norms = block_norms(g);
        return radius_ * norms.lpNorm<Eigen::Infinity>();
      }
    }
    throw NumericalFailure("support: unreachable");
  }

  bool contains(const Vector& v, double tol = -1.0) const {
    check_dim(v);
    if (tol < 0) tol = feasibility_tol();
    if (kind_ == SetKind::Simplex) {
      return v.minCoeff() >= -tol && std::abs(v.sum() - 1.0) <= tol;
    }
    return gauge(v) <= 1.0 + tol / std::max(radius_, 1e-300);
  }

  // A spread of random points of C, used by sampling-based checks. The
  // distribution is roughly uniform; checks that use it only need coverage.
  Vector sample(Rng& rng) const {
    switch (kind_) {
      case SetKind::Simplex: {
        Vector e(dim_);
        for (int i = 0; i < dim_; ++i) e[i] = -std::log(1.0 - rng.uniform());
        return e / e.sum();
      }
      case SetKind::L2Ball: {
        Vector g = rng.gaussian_vector(dim_);
        double u = std::pow(rng.uniform(), 1.0 / dim_);
        return (radius_ * u / std::max(g.norm(), 1e-300)) * g;
      }
      default: {
        Vector g = rng.gaussian_vector(dim_);
        double u = std::pow(rng.uniform(), 1.0 / dim_);
        double scale = radius_ * u / std::max(gauge(g) * radius_, 1e-300);
        return scale * g;
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", kind_name()}, {"radius", radius_}, {"dim", dim_}};
    if (kind_ == SetKind::LpBall) j["p"] = p_;
    if (kind_ == SetKind::GroupL12) j["k"] = block_;
    return j;
  }

  static ConstraintSet from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    const double radius = j.value("radius", 1.0);
    if (kind == "l2_ball") return l2_ball(dim, radius);
    if (kind == "l1_ball") return l1_ball(dim, radius);
    if (kind == "simplex") return simplex(dim);
    if (kind == "lp_ball") return lp_ball(dim, radius, j.at("p").get<double>());
    if (kind == "group_l12") return group_l12(dim, radius, j.at("k").get<int>());
    throw InvalidInput("constraint set: unknown kind '" + kind + "'");
  }

  std::string kind_name() const {
    switch (kind_) {
      case SetKind::L2Ball: return "l2_ball";
      case SetKind::L1Ball: return "l1_ball";
      case SetKind::Simplex: return "simplex";
      case SetKind::LpBall: return "lp_ball";
      case SetKind::GroupL12: return "group_l12";
    }
    return "?";
  }

 private:
  ConstraintSet(SetKind kind, int dim, double radius, double p, int block)
      : kind_(kind), dim_(dim), radius_(radius), p_(p), block_(block) {
    if (dim < 1) throw InvalidInput("constraint set: dim must be >= 1");
    if (!(radius > 0) || !std::isfinite(radius))
      throw InvalidInput("constraint set: radius must be positive");
  }

  void check_dim(const Vector& v) const {
    if (v.size() != dim_) throw InvalidInput("constraint set: dimension mismatch");
  }

  Vector block_norms(const Vector& v) const {
    int nblocks = (dim_ + block_ - 1) / block_;
    Vector norms(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      int lo = b * block_;
      int len = std::min(block_, dim_ - lo);
      norms[b] = v.segment(lo, len).norm();
    }
    return norms;
  }

  SetKind kind_;
  int dim_;
  double radius_;
  double p_;    // LpBall only
  int block_;   // GroupL12 only
};

// The domain the covariates are drawn from. Every generated point satisfies
// ||x|| <= 1.
struct DomainSpec {
  enum class Kind { UnitL2Ball, KSparse, UnitL1Ball };

  Kind kind = Kind::UnitL2Ball;
  int dim = 1;
  int k = 0;  // KSparse only

  static DomainSpec unit_l2_ball(int dim) { return {Kind::UnitL2Ball, dim, 0}; }
  static DomainSpec k_sparse(int dim, int k) {
    if (k < 1 || k > dim) throw InvalidInput("k_sparse: k out of range");
    return {Kind::KSparse, dim, k};
  }
  static DomainSpec unit_l1_ball(int dim) { return {Kind::UnitL1Ball, dim, 0}; }

  // sup_{a in domain} <a, g>.
  double support(const Vector& g) const {
    if (g.size() != dim) throw InvalidInput("domain spec: dimension mismatch");
    switch (kind) {
      case Kind::UnitL2Ball:
        return g.norm();
      case Kind::UnitL1Ball:
        return g.lpNorm<Eigen::Infinity>();
      case Kind::KSparse: {
        // Unit-norm k-sparse vectors: the best support picks the k largest
        // |g_i| and aligns a unit vector with them.
        std::vector<double> sq(dim);
        for (int i = 0; i < dim; ++i) sq[i] = g[i] * g[i];
        std::nth_element(sq.begin(), sq.begin() + (k - 1), sq.end(), std::greater<double>());
        double acc = 0.0;
        for (int i = 0; i < k; ++i) acc += sq[i];
        return std::sqrt(acc);
      }
    }
    return 0.0;
  }

  // Random covariate with ||x|| <= 1 (exactly 1 for the sparse kind).
  Vector sample(Rng& rng) const {
    switch (kind) {
      case Kind::UnitL2Ball: {
        Vector g = rng.gaussian_vector(dim);
        double u = std::pow(rng.uniform(), 1.0 / dim);
        return (u / std::max(g.norm(), 1e-300)) * g;
      }
      case Kind::UnitL1Ball: {
        Vector e(dim);
        double sgn_mass = 0;
        for (int i = 0; i < dim; ++i) {
          e[i] = -std::log(1.0 - rng.uniform());
          sgn_mass += e[i];
        }
        double u = std::pow(rng.uniform(), 1.0 / dim);
        Vector out = (u / sgn_mass) * e;
        for (int i = 0; i < dim; ++i)
          if (rng.uniform() < 0.5) out[i] = -out[i];
        return out;
      }
      case Kind::KSparse: {
        Vector out = Vector::Zero(dim);
        // Sample k distinct coordinates by partial Fisher-Yates.
        std::vector<int> idx(dim);
        for (int i = 0; i < dim; ++i) idx[i] = i;
        for (int i = 0; i < k; ++i) {
          int j = i + static_cast<int>(rng.uniform() * (dim - i));
          if (j >= dim) j = dim - 1;
          std::swap(idx[i], idx[j]);
        }
        Vector vals = rng.gaussian_vector(k);
        double n = std::max(vals.norm(), 1e-300);
        for (int i = 0; i < k; ++i) out[idx[i]] = vals[i] / n;
        return out;
      }
    }
    return Vector::Zero(dim);
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", kind_name()}, {"dim", dim}};
    if (kind == Kind::KSparse) j["k"] = k;
    return j;
  }

  static DomainSpec from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (kind == "unit_l2_ball") return unit_l2_ball(dim);
    if (kind == "k_sparse") return k_sparse(dim, j.at("k").get<int>());
    if (kind == "unit_l1_ball") return unit_l1_ball(dim);
    throw InvalidInput("domain spec: unknown kind '" + kind + "'");
  }

  std::string kind_name() const {
    switch (kind) {
      case Kind::UnitL2Ball: return "unit_l2_ball";
      case Kind::KSparse: return "k_sparse";
      case Kind::UnitL1Ball: return "unit_l1_ball";
    }
    return "?";
  }
};

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

namespace detail {

template <typename SupportFn>
WidthEstimate width_monte_carlo(int dim, int samples, SupportFn&& sup, Rng& rng) {
  if (samples < 1) throw InvalidInput("gaussian width: samples must be >= 1");
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    double v = sup(rng.gaussian_vector(dim));
    acc += v;
    acc2 += v * v;
  }
  double mean = acc / samples;
  double var = std::max(acc2 / samples - mean * mean, 0.0);
  return {mean, std::sqrt(var / samples), samples};
}

}  // namespace detail

// Monte Carlo estimate of the Gaussian width w(S) = E sup_{a in S} <a, g>.
// The inner supremum is the exact support function, so the only error is the
// sampling error reported in std_error.
inline WidthEstimate estimate_gaussian_width(const ConstraintSet& set, int samples, Rng& rng) {
  return detail::width_monte_carlo(set.dim(), samples,
                                   [&](const Vector& g) { return set.support(g); }, rng);
}

inline WidthEstimate estimate_gaussian_width(const DomainSpec& domain, int samples, Rng& rng) {
  return detail::width_monte_carlo(domain.dim, samples,
                                   [&](const Vector& g) { return domain.support(g); }, rng);
}

// Leading-order width values for the common bodies. These are order
// estimates (the hidden factors are modest but not sharp); use the Monte
// Carlo estimator when an accurate number matters.
inline double asymptotic_width_l2(int dim, double radius = 1.0) {
  return radius * std::sqrt(static_cast<double>(dim));
}
inline double asymptotic_width_l1(int dim, double radius = 1.0) {
  return radius * std::sqrt(2.0 * std::log(2.0 * dim));
}
inline double asymptotic_width_ksparse(int dim, int k) {
  return std::sqrt(2.0 * k * std::log(2.0 * static_cast<double>(dim) / k));
}

}  // namespace streamdp

#endif  // STREAMDP_GEOMETRY_HPP
