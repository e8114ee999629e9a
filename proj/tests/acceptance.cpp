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

// End-to-end acceptance suite. Each numbered criterion prints exactly one
// pass/fail line with the measured quantity next to its fixed threshold;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "streamdp/streamdp.hpp"

using namespace streamdp;

namespace {

struct Criterion {
  int number;
  std::string name;
  std::function<bool(std::string&)> run;
};

double tree_error_scale(int T, double eps, double delta) {
  return std::pow(std::log2(static_cast<double>(T)), 1.5) * std::sqrt(std::log(1.0 / delta)) / eps;
}

std::vector<StreamPoint> dense_stream(int T, int d, std::uint64_t seed, double signal,
                                      double noise) {
  Rng rng(seed);
  Eigen::VectorXd star = signal * rng.gaussian_vector(d).normalized();
  std::vector<StreamPoint> stream(T);
  for (auto& z : stream) {
    z.x = rng.gaussian_vector(d);
    z.x /= std::max(z.x.norm(), 1.0) * (1.0 + rng.uniform());
    z.y = std::clamp(z.x.dot(star) + noise * rng.gaussian(), -1.0, 1.0);
  }
  return stream;
}

// --- 1. zero-noise oracle equivalence --------------------------------------

bool criterion_zero_noise_equivalence(std::string& detail) {
  ScopedNoiseDisable scoped;
  Rng pick(101);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    int T = 32 + static_cast<int>(pick.uniform() * 96);   // <= 128
    int d = 2 + static_cast<int>(pick.uniform() * 3);     // <= 4
    auto set = ConstraintSet::l2_ball(d, 1.0);
    auto stream = dense_stream(T, d, 7000 + trial, 0.5, 0.1);
    IncRegResult run = run_priv_inc_reg(stream, set, {1.0, 1e-5}, 0.05, trial);
    for (int t = 1; t <= T; ++t) {
      std::span<const StreamPoint> prefix(stream.data(), t);
      double got = oracles::empirical_risk(prefix, run.outputs[t - 1]);
      double best = exact_minimizer(set, prefix, LossSpec::squared(set)).risk;
      worst_ratio = std::max(worst_ratio, (got - best) / t);
    }
  }
  std::ostringstream out;
  out << "max excess/t = " << worst_ratio << " (limit 1e-3), 20 streams";
  detail = out.str();
  return worst_ratio <= 1e-3;
}

// --- 2. tree mechanism exactness and error shape ----------------------------

bool criterion_tree_shape(std::string& detail) {
  // Exactness under zero noise.
  double worst_exact = 0.0;
  {
    ScopedNoiseDisable scoped;
    Rng pick(31);
    for (int trial = 0; trial < 100; ++trial) {
      int T = 2 + static_cast<int>(pick.uniform() * 254);
      int d = 1 + static_cast<int>(pick.uniform() * 7);
      std::vector<Eigen::VectorXd> stream;
      for (int t = 0; t < T; ++t) stream.push_back(pick.gaussian_vector(d));
      auto exact = oracles::prefix_sums(stream);
      TreeMechanism tree(T, d, PrivacyBudget(1.0, 1e-5), SensitivityBound(2.0), Rng(trial));
      for (int t = 0; t < T; ++t)
        worst_exact = std::max(worst_exact,
                               (tree.step(stream[t]) - exact[t]).lpNorm<Eigen::Infinity>());
    }
  }
  if (worst_exact > 1e-9) {
    detail = "zero-noise prefix sums deviate by " + std::to_string(worst_exact);
    return false;
  }

  // Error scale at T = 1024, d = 1, eps = 1, delta = 1e-5, Delta2 = 2.
  const int T = 1024;
  const PrivacyBudget budget(1.0, 1e-5);
  const double kappa = tree_error_scale(T, budget.epsilon, budget.delta);
  std::vector<double> max_errors;
  max_errors.reserve(1000);
  int participation_bound = TreeMechanism::ceil_log2(T) + 1;
  int worst_participation = 0;
  for (int run = 0; run < 1000; ++run) {
    TreeMechanism tree(T, 1, budget, SensitivityBound(2.0), Rng(run));
    if (run == 0) tree.enable_participation_tracking();
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    double worst = 0.0;
    for (int t = 0; t < T; ++t) worst = std::max(worst, std::abs(tree.step(zero)[0]));
    max_errors.push_back(worst);
    if (run == 0)
      for (int count : tree.participation_counts())
        worst_participation = std::max(worst_participation, count);
  }
  double p99 = oracles::percentile(max_errors, 0.99);
  std::ostringstream out;
  out << "exactness ok; p99 max error = " << p99 << " (limit 10*kappa = " << 10 * kappa
      << "); max participation = " << worst_participation << " (limit " << participation_bound
      << ")";
  detail = out.str();
  return p99 <= 10 * kappa && worst_participation <= participation_bound;
}

// --- 3. noise calibration ----------------------------------------------------

bool criterion_noise_calibration(std::string& detail) {
  Rng rng(3);
  PrivacyBudget budget(1.0, 0.01);
  SensitivityBound sensitivity(1.0);
  double expected = gaussian_noise_variance(sensitivity, budget);
  const int n = 100'000;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double y = gaussian_mechanism(zero, sensitivity, budget, rng)[0];
    acc += y;
    acc2 += y * y;
  }
  double var = acc2 / n - (acc / n) * (acc / n);
  bool variance_ok = std::abs(var - expected) <= 0.05 * expected;

  TreeMechanism tree(16, 1, PrivacyBudget(1.0, 0.01), SensitivityBound(2.0), Rng(0));
  double formula = 2.0 * 16.0 * 4.0 * std::log(200.0);
  bool sigma_ok = std::abs(tree.sigma2() - formula) <= 1e-9 * formula &&
                  std::abs(tree.sigma2() - 678.2) <= 0.1;

  std::ostringstream out;
  out << "empirical variance " << var << " vs " << expected << " (5% band); tree sigma2 = "
      << tree.sigma2() << " (formula " << formula << ")";
  detail = out.str();
  return variance_ok && sigma_ok;
}

// --- 4. approximate-gradient descent guarantee ------------------------------

bool criterion_noisy_pgd_bound(std::string& detail) {
  Rng rng(4);
  int violations = 0;
  double worst_margin = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + static_cast<int>(rng.uniform() * 7);
    double radius = 0.5 + rng.uniform();
    auto set = ConstraintSet::l2_ball(d, radius);
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = rng.gaussian();
    Eigen::MatrixXd A = M.transpose() * M / d + 0.05 * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b = rng.gaussian_vector(d);
    auto value = [&](const Eigen::VectorXd& p) { return p.dot(A * p) + b.dot(p); };

    Eigen::VectorXd opt = oracles::quadratic_l2ball_minimizer(A, b, radius);
    double lipschitz = 2.0 * A.operatorNorm() * radius + b.norm();
    double alpha = rng.uniform() * lipschitz;
    int r = 16 + static_cast<int>(rng.uniform() * 200);
    double bound = (alpha + lipschitz) * set.diameter() / std::sqrt(static_cast<double>(r)) +
                   alpha * set.diameter();

    GradientOracle oracle;
    oracle.alpha = alpha;
    oracle.lipschitz = lipschitz;
    oracle.eval = [&](const Eigen::VectorXd& theta) {
      Eigen::VectorXd away = theta - opt;
      double n = away.norm();
      Eigen::VectorXd u = n > 1e-12 ? Eigen::VectorXd(away / n) : Eigen::VectorXd::Unit(d, 0);
      return Eigen::VectorXd(2.0 * A * theta + b + alpha * u);
    };
    PgdConfig cfg;
    cfg.iterations = r;
    cfg.start = set.project(rng.gaussian_vector(d));
    Eigen::VectorXd out = noisy_projected_gradient(set, oracle, cfg);
    double margin = value(out) - value(opt) - bound;
    worst_margin = std::max(worst_margin, margin);
    if (margin > 1e-9) ++violations;
  }
  std::ostringstream out;
  out << violations << "/100 adversarial violations (worst margin " << worst_margin << ")";
  detail = out.str();
  return violations == 0;
}

// --- 5. budget accounting ----------------------------------------------------

bool criterion_budget_accounting(std::string& detail) {
  int points = 0, failures = 0;
  // Interval mechanism: floor(T/tau) charges at the per-call split compose
  // (with slack delta/2) to at most the configured budget.
  for (int T : {16, 64, 256, 1024}) {
    for (int tau : {1, 2, 8, 32, 128}) {
      if (tau > T) continue;
      for (double eps : {0.25, 1.0, 2.0}) {
        for (double delta : {1e-6, 1e-4, 1e-2}) {
          PrivacyBudget call = split_for_inc_erm({eps, delta}, T, tau);
          BudgetLedger ledger;
          for (int k = 0; k < T / tau; ++k) ledger.charge(call.epsilon, call.delta);
          EpsDelta total = ledger.total_advanced(delta / 2);
          ++points;
          if (!(total.epsilon <= eps + 1e-12 && total.delta <= delta + 1e-12)) ++failures;
        }
      }
    }
  }
  // The synthetic ledger above must match what a real run records.
  {
    auto set = ConstraintSet::l2_ball(2, 1.0);
    auto stream = dense_stream(32, 2, 99, 0.4, 0.1);
    IncErmConfig config;
    config.T = 32;
    config.budget = PrivacyBudget(1.0, 1e-4);
    config.tau = 8;
    config.solver.iterations = 4;
    IncErmResult run = run_inc_erm(stream, set, LossSpec::squared(set), config);
    PrivacyBudget call = split_for_inc_erm(config.budget, 32, 8);
    ++points;
    if (run.ledger.size() != 4 ||
        std::abs(run.ledger.interactions()[0].epsilon - call.epsilon) > 1e-15)
      ++failures;
    EpsDelta total = run.ledger.total_advanced(config.budget.delta / 2);
    ++points;
    if (!(total.epsilon <= config.budget.epsilon && total.delta <= config.budget.delta))
      ++failures;
  }
  // Tree-based runs: two mechanisms at half budget summing to the target.
  for (double eps : {0.5, 1.0}) {
    for (double delta : {1e-5, 1e-3}) {
      auto set = ConstraintSet::l2_ball(2, 1.0);
      PrivIncRegRun run(set, 8, {eps, delta}, 0.05, 1);
      EpsDelta total = run.ledger().total_basic();
      ++points;
      if (!(std::abs(total.epsilon - eps) <= 1e-12 && std::abs(total.delta - delta) <= 1e-15))
        ++failures;
    }
  }
  std::ostringstream out;
  out << points << " grid points, " << failures << " violations";
  detail = out.str();
  return points >= 50 && failures == 0;
}

// --- 6. sqrt(d) trend of the tree-gradient algorithm -------------------------

bool criterion_dimension_trend(std::string& detail) {
  const int T = 512;
  std::vector<double> medians;
  for (int d : {2, 8, 32}) {
    auto set = ConstraintSet::l2_ball(d, 1.0);
    std::vector<double> excesses;
    for (int seed = 0; seed < 20; ++seed) {
      auto stream = dense_stream(T, d, 1000 * d + seed, 0.5, 0.1);
      IncRegResult run = run_priv_inc_reg(stream, set, {1.0, 1e-5}, 0.05, seed);
      double got = oracles::empirical_risk(stream, run.outputs.back());
      double best = exact_minimizer(set, stream, LossSpec::squared(set)).risk;
      excesses.push_back(got - best);
    }
    medians.push_back(median(excesses));
  }
  double ratio = medians[2] / medians[0];
  std::ostringstream out;
  out << "median excess at T: d=2: " << medians[0] << ", d=8: " << medians[1]
      << ", d=32: " << medians[2] << "; ratio(32/2) = " << ratio << " (band [2, 12])";
  detail = out.str();
  return ratio >= 2.0 && ratio <= 12.0;
}

// --- 7. dimension-free trend of the projected algorithm ----------------------

bool criterion_projection_beats_tree(std::string& detail) {
  ExperimentConfig config;
  config.algorithm = Algorithm::ProjPrivIncReg;
  config.T = 1000;
  config.d = 512;
  config.epsilon = 1.0;
  config.delta = 1e-5;
  config.beta = 0.05;
  config.constraint = ConstraintSet::l1_ball(512, 1.0);
  config.generator.domain = DomainSpec::k_sparse(512, 4);
  config.generator.theta_star = Eigen::VectorXd::Zero(512);
  config.generator.theta_star[3] = 0.25;
  config.generator.theta_star[97] = -0.25;
  config.generator.theta_star[211] = 0.25;
  config.generator.theta_star[402] = 0.25;
  config.generator.noise_sigma = 0.0;
  // Desk-scale projected dimension; the embedding criterion below verifies
  // that the distortion stays within gamma at this sizing.
  config.constants.c_m = 0.3;

  LossSpec loss = LossSpec::squared(*config.constraint);
  std::vector<double> tree, projected;
  int m_used = 0;
  for (int seed = 0; seed < 10; ++seed) {
    GeneratedStream stream = generate_stream(config.generator, *config.constraint, config.T, seed);
    auto [wd, wc] = resolve_widths(config, seed);
    ProjIncRegResult proj_run =
        run_proj_priv_inc_reg(stream.points, *config.constraint, {config.epsilon, config.delta},
                              config.beta, wd, wc, seed, config.constants);
    IncRegResult tree_run =
        run_priv_inc_reg(stream.points, *config.constraint, {config.epsilon, config.delta},
                         config.beta, seed, config.constants);
    double best = exact_minimizer(*config.constraint, stream.points, loss).risk;
    projected.push_back(oracles::empirical_risk(stream.points, proj_run.outputs.back()) - best);
    tree.push_back(oracles::empirical_risk(stream.points, tree_run.outputs.back()) - best);
    m_used = proj_run.params.m;
  }
  double tree_median = median(tree), proj_median = median(projected);
  std::ostringstream out;
  out << "median excess at T over 10 seeds: projected = " << proj_median
      << " vs tree = " << tree_median << " (m = " << m_used << ")";
  detail = out.str();
  return proj_median < tree_median;
}

// --- 8. embedding validity ----------------------------------------------------

bool criterion_embedding(std::string& detail) {
  double gamma = std::pow(4.0, 1.0 / 3.0) / std::pow(1000.0, 1.0 / 3.0);
  int m = ProjectionSpec::target_dim(1000, 4.0, 0.05, 1.0);
  bool formulas_ok = std::abs(gamma - 0.1587) <= 2e-4 && m == 635;

  const int d = 256;
  Rng rng(8);
  ProjectionSpec spec = ProjectionSpec::draw(d, 1000, 4.0, 0.05, 1.0, rng);
  auto domain = DomainSpec::k_sparse(d, 4);
  auto set = ConstraintSet::l1_ball(d, 1.0);
  std::vector<Eigen::VectorXd> sample;
  for (int i = 0; i < 23; ++i) sample.push_back(domain.sample(rng));
  for (int i = 0; i < 23; ++i) sample.push_back(set.sample(rng));
  EmbeddingReport report = embedding_check(spec.Phi, sample, spec.gamma);

  std::ostringstream out;
  out << "gamma = " << gamma << ", m = " << m << "; violation fraction = " << report.fraction
      << " over " << report.pairs << " pairs (limit 0.05)";
  detail = out.str();
  return formulas_ok && report.pairs >= 1000 && report.fraction <= 0.05;
}

// --- 9. lift correctness --------------------------------------------------------

bool criterion_lift(std::string& detail) {
  const int d = 64;
  const int m = 25;  // ~6 ln d measurements
  auto set = ConstraintSet::l1_ball(d, 1.0);
  int recovered = 0;
  double worst_residual = 0.0, worst_gauge = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(9000 + trial);
    Eigen::MatrixXd Phi(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) Phi(i, j) = rng.gaussian() / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(d);
    theta0[static_cast<int>(rng.uniform() * d)] = rng.uniform() < 0.5 ? 0.8 : -0.8;
    GaugeLifter lifter(set, Phi);
    GaugeLifter::Result r = lifter.lift(Phi * theta0);
    worst_residual = std::max(worst_residual, r.residual);
    worst_gauge = std::max(worst_gauge, r.gauge);
    if ((r.theta - theta0).norm() <= 0.1 * set.diameter()) ++recovered;
  }
  std::ostringstream out;
  out << recovered << "/100 recovered; worst residual = " << worst_residual
      << " (limit 1e-6), worst gauge = " << worst_gauge << " (limit 1 + 1e-6)";
  detail = out.str();
  return recovered >= 90 && worst_residual <= 1e-6 * set.diameter() &&
         worst_gauge <= 1.0 + 1e-6;
}

// --- 10. interval mechanism structure -------------------------------------------

bool criterion_interval_structure(std::string& detail) {
  // Worked refresh-interval value.
  TauParams params;
  params.T = 1000;
  params.d = 8;
  params.epsilon = 1.0;
  int tau = choose_tau(TauPolicy::Convex, params);
  if (tau != 20) {
    detail = "convex policy tau = " + std::to_string(tau) + " (expected 20)";
    return false;
  }

  ScopedNoiseDisable scoped;
  BatchSolverFn exact_solver = [](std::span<const StreamPoint> data, const ConstraintSet& c,
                                  const LossSpec& l, const PrivacyBudget&, Rng&) {
    return exact_minimizer(c, data, l).theta;
  };
  Rng pick(10);
  double worst_staleness_margin = -1e300;
  bool structure_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    int T = 24 + static_cast<int>(pick.uniform() * 104);
    int d = 2 + static_cast<int>(pick.uniform() * 3);
    int interval = 2 + static_cast<int>(pick.uniform() * 10);
    auto set = ConstraintSet::l2_ball(d, 1.0);
    LossSpec loss = LossSpec::squared(set);
    auto stream = dense_stream(T, d, 20'000 + trial, 0.5, 0.1);
    IncErmConfig config;
    config.T = T;
    config.budget = PrivacyBudget(1.0, 1e-5);
    config.tau = interval;
    IncErmResult run = run_inc_erm(stream, set, loss, config, exact_solver);
    for (int t = 2; t <= T; ++t) {
      bool changed = (run.outputs[t - 1] - run.outputs[t - 2]).norm() > 0;
      if (changed && t % interval != 0) structure_ok = false;
    }
    double bound = 2.0 * interval * loss.lipschitz * set.diameter();
    for (int t : {interval + 1, T}) {
      std::span<const StreamPoint> prefix(stream.data(), t);
      double got = oracles::empirical_risk(prefix, run.outputs[t - 1]);
      double best = exact_minimizer(set, prefix, loss).risk;
      worst_staleness_margin = std::max(worst_staleness_margin, got - best - bound);
    }
  }
  std::ostringstream out;
  out << "tau(convex, T=1000, d=8, eps=1) = 20; breakpoints "
      << (structure_ok ? "aligned" : "MISALIGNED") << "; worst staleness margin = "
      << worst_staleness_margin << " (limit 0)";
  detail = out.str();
  return structure_ok && worst_staleness_margin <= 1e-6;
}

// --- 11. geometry suite -----------------------------------------------------------

bool criterion_geometry(std::string& detail) {
  Rng rng(11);
  std::vector<ConstraintSet> sets = {
      ConstraintSet::l2_ball(6, 1.0),   ConstraintSet::l1_ball(6, 1.0),
      ConstraintSet::simplex(6),        ConstraintSet::lp_ball(6, 1.0, 1.5),
      ConstraintSet::group_l12(6, 1.0, 2),
  };
  // Idempotence and the variational inequality.
  for (const auto& set : sets) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd v = 2.5 * rng.gaussian_vector(6);
      Eigen::VectorXd p = set.project(v);
      if ((set.project(p) - p).norm() > 1e-9) {
        detail = set.kind_name() + ": projection not idempotent";
        return false;
      }
      for (int s = 0; s < 100; ++s) {
        Eigen::VectorXd z = set.sample(rng);
        if ((v - p).dot(z - p) > 1e-7) {
          detail = set.kind_name() + ": variational inequality violated";
          return false;
        }
      }
    }
  }
  // Gauge/membership duality.
  for (const auto& set : sets) {
    if (set.kind() == SetKind::Simplex) continue;
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd v = 1.5 * rng.gaussian_vector(6);
      double gauge = set.gauge(v);
      bool fixed = (set.project(v) - v).norm() <= 1e-9;
      if (gauge < 1.0 - 1e-9 && !fixed) {
        detail = set.kind_name() + ": interior point moved by projection";
        return false;
      }
      if (gauge > 1.0 + 1e-9 && fixed) {
        detail = set.kind_name() + ": exterior point fixed by projection";
        return false;
      }
    }
  }
  // Sort-based projection against the dual-threshold oracle.
  for (int trial = 0; trial < 1000; ++trial) {
    int d = 2 + static_cast<int>(rng.uniform() * 15);
    double radius = 0.3 + rng.uniform();
    Eigen::VectorXd v = 2.0 * rng.gaussian_vector(d);
    Eigen::VectorXd mine = ConstraintSet::l1_ball(d, radius).project(v);
    Eigen::VectorXd reference = oracles::l1_project_bisection(v, radius);
    if ((mine - reference).lpNorm<Eigen::Infinity>() > 1e-8) {
      detail = "l1 projection deviates from the bisection oracle";
      return false;
    }
  }
  // Width closed forms.
  auto w2 = estimate_gaussian_width(ConstraintSet::l2_ball(2, 1.0), 1'000'000, rng);
  auto w1 = estimate_gaussian_width(ConstraintSet::l1_ball(1, 1.0), 1'000'000, rng);
  double err2 = std::abs(w2.mean - std::sqrt(M_PI / 2.0));
  double err1 = std::abs(w1.mean - std::sqrt(2.0 / M_PI));
  std::ostringstream out;
  out << "projections, duality, oracle match ok; width errors " << err2 << ", " << err1
      << " (limit 0.01)";
  detail = out.str();
  return err2 <= 0.01 && err1 <= 0.01;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "zero-noise oracle equivalence", criterion_zero_noise_equivalence},
      {2, "tree mechanism exactness and error shape", criterion_tree_shape},
      {3, "noise calibration", criterion_noise_calibration},
      {4, "approximate-gradient descent guarantee", criterion_noisy_pgd_bound},
      {5, "budget accounting", criterion_budget_accounting},
      {6, "sqrt(d) excess-risk trend", criterion_dimension_trend},
      {7, "projected algorithm beats tree algorithm on sparse data", criterion_projection_beats_tree},
      {8, "embedding validity", criterion_embedding},
      {9, "lift correctness", criterion_lift},
      {10, "interval mechanism structure", criterion_interval_structure},
      {11, "geometry suite", criterion_geometry},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s -- %s (%.1fs)\n", ok ? "PASS" : "FAIL",
                criterion.number, criterion.name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
