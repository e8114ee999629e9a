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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "streamdp/inc_regression.hpp"
#include "streamdp/optimizer.hpp"

using namespace streamdp;

namespace {

std::vector<StreamPoint> make_stream(int T, int d, std::uint64_t seed, double signal = 0.5,
                                     double noise = 0.1) {
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

double tree_error_scale(int T, double eps, double delta) {
  return std::pow(std::log2(static_cast<double>(T)), 1.5) * std::sqrt(std::log(1.0 / delta)) / eps;
}

}  // namespace

TEST_CASE("true gradient basics") {
  std::vector<StreamPoint> empty;
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  CHECK(true_gradient(empty, zero2).norm() == 0.0);

  std::vector<StreamPoint> one(1);
  one[0].x = Eigen::VectorXd::Zero(2);
  one[0].x[0] = 1.0;
  one[0].y = 1.0;
  Eigen::VectorXd g = true_gradient(one, zero2);
  CHECK(g[0] == doctest::Approx(-2.0));
  CHECK(g[1] == doctest::Approx(0.0));
}

TEST_CASE("true gradient matches finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    int t = 1 + static_cast<int>(rng.uniform() * 63);
    int d = 1 + static_cast<int>(rng.uniform() * 7);
    auto stream = make_stream(t, d, 30 + trial);
    Eigen::VectorXd theta = rng.gaussian_vector(d);
    auto risk = [&](const Eigen::VectorXd& p) { return oracles::empirical_risk(stream, p); };
    Eigen::VectorXd numeric = oracles::finite_difference_gradient(risk, theta);
    Eigen::VectorXd analytic = true_gradient(stream, theta);
    CHECK((numeric - analytic).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, analytic.norm()));
  }
}

TEST_CASE("moment sensitivities stay within the calibrated bound") {
  Rng rng(7);
  auto domain = DomainSpec::unit_l2_ball(6);
  double worst_outer = 0.0, worst_moment = 0.0;
  for (int trial = 0; trial < 100'000; ++trial) {
    Eigen::VectorXd xa = domain.sample(rng), xb = domain.sample(rng);
    double ya = 2.0 * rng.uniform() - 1.0, yb = 2.0 * rng.uniform() - 1.0;
    worst_outer = std::max(
        worst_outer, (xa * xa.transpose() - xb * xb.transpose()).norm());  // Frobenius
    worst_moment = std::max(worst_moment, (ya * xa - yb * xb).norm());
  }
  CHECK(worst_outer <= 2.0 + 1e-12);
  CHECK(worst_moment <= 2.0 + 1e-12);
}

TEST_CASE("zero-noise run tracks the exact minimizer") {
  ScopedNoiseDisable scoped;
  for (int trial = 0; trial < 5; ++trial) {
    int T = 64 + trial * 16;
    int d = 2 + trial % 3;
    auto set = ConstraintSet::l2_ball(d, 1.0);
    auto stream = make_stream(T, d, 50 + trial);
    IncRegResult result = run_priv_inc_reg(stream, set, {1.0, 1e-5}, 0.05, trial);
    for (int t = 1; t <= T; ++t) {
      std::span<const StreamPoint> prefix(stream.data(), t);
      double got = oracles::empirical_risk(prefix, result.outputs[t - 1]);
      double best = exact_minimizer(set, prefix, LossSpec::squared(set)).risk;
      CHECK(got - best <= 1e-3 * t);
      CHECK(got - best >= -1e-7);
    }
  }
}

TEST_CASE("outputs stay feasible under pure noise") {
  auto set = ConstraintSet::l1_ball(3, 1.0);
  std::vector<StreamPoint> zeros(40);
  for (auto& z : zeros) {
    z.x = Eigen::VectorXd::Zero(3);
    z.y = 0.0;
  }
  IncRegResult result = run_priv_inc_reg(zeros, set, {1.0, 1e-5}, 0.05, 9);
  for (const auto& theta : result.outputs) CHECK(set.gauge(theta) <= 1.0 + 1e-9);
}

TEST_CASE("released moment matrix is symmetric and the map is affine") {
  auto set = ConstraintSet::l2_ball(3, 1.0);
  auto stream = make_stream(16, 3, 11);
  PrivIncRegRun run(set, 16, {1.0, 1e-5}, 0.05, 13);
  for (const auto& z : stream) run.step(z);
  const PrivateGradientFn& g = run.gradient_fn();
  CHECK((g.Q - g.Q.transpose()).norm() <= 1e-12);
  Rng rng(1);
  Eigen::VectorXd a = rng.gaussian_vector(3), b = rng.gaussian_vector(3);
  // Affinity: g(a) - g(b) is linear in a - b.
  Eigen::VectorXd lhs = g(a) - g(b);
  Eigen::VectorXd rhs = 2.0 * (g.Q * (a - b));
  CHECK((lhs - rhs).norm() <= 1e-10);
}

TEST_CASE("two trees at half budget compose to the target") {
  auto set = ConstraintSet::l2_ball(2, 1.0);
  PrivIncRegRun run(set, 8, {0.8, 1e-4}, 0.05, 3);
  const auto& items = run.ledger().interactions();
  REQUIRE(items.size() == 2);
  CHECK(items[0].epsilon == doctest::Approx(0.4));
  CHECK(items[0].delta == doctest::Approx(5e-5));
  EpsDelta total = run.ledger().total_basic();
  CHECK(total.epsilon == doctest::Approx(0.8));
  CHECK(total.delta == doctest::Approx(1e-4));
}

TEST_CASE("released gradient error scales like the mechanism constant") {
  // At a fixed feasible theta, the 99th percentile of
  // ||g_t(theta) - grad L(theta)|| over seeded runs, divided by
  // kappa * ||C|| * (sqrt(d) + sqrt(ln(1/beta))), must stay of the same
  // order across a 16x range of stream lengths.
  const int d = 3;
  const double beta = 0.01;
  auto set = ConstraintSet::l2_ball(d, 1.0);
  Rng theta_rng(21);
  Eigen::VectorXd theta = set.sample(theta_rng);
  const int runs = 500;
  double min_c = 1e300, max_c = 0.0;
  for (int T : {64, 256, 1024}) {
    auto stream = make_stream(T, d, 1000 + T);
    std::vector<double> errors;
    errors.reserve(runs);
    for (int run_idx = 0; run_idx < runs; ++run_idx) {
      PrivIncRegRun run(set, T, {1.0, 1e-5}, 0.05, 5000 + run_idx);
      for (const auto& z : stream) run.step(z);
      Eigen::VectorXd released = run.gradient_fn()(theta);
      Eigen::VectorXd exact = true_gradient(stream, theta);
      errors.push_back((released - exact).norm());
    }
    double p99 = oracles::percentile(errors, 0.99);
    double kappa = tree_error_scale(T, 0.5, 0.5e-5);
    double scale = kappa * set.diameter() *
                   (std::sqrt(static_cast<double>(d)) + std::sqrt(std::log(1.0 / beta)));
    double c = p99 / scale;
    MESSAGE("T=", T, " fitted c=", c);
    CHECK(std::isfinite(c));
    min_c = std::min(min_c, c);
    max_c = std::max(max_c, c);
  }
  CHECK(max_c / min_c <= 3.0);
}

TEST_CASE("ingestion policies") {
  auto set = ConstraintSet::l2_ball(2, 1.0);
  StreamPoint bad;
  bad.x = Eigen::VectorXd::Ones(2) * 3.0;
  bad.y = 2.0;

  PrivIncRegRun reject(set, 4, {1.0, 1e-5}, 0.05, 1);
  CHECK_THROWS_AS(reject.step(bad), InvalidInput);

  PrivIncRegRun clip(set, 4, {1.0, 1e-5}, 0.05, 1, RunConstants{}, IngestPolicy::Clip);
  Eigen::VectorXd theta = clip.step(bad);
  CHECK(clip.clip_count() == 1);
  CHECK(set.contains(theta, 1e-7));
}

TEST_CASE("stream overrun propagates") {
  auto set = ConstraintSet::l2_ball(2, 1.0);
  PrivIncRegRun run(set, 1, {1.0, 1e-5}, 0.05, 1);
  StreamPoint z;
  z.x = Eigen::VectorXd::Zero(2);
  z.y = 0.0;
  run.step(z);
  CHECK_THROWS_AS(run.step(z), StreamExhausted);
}

TEST_CASE("run parameters echo the configured formulas") {
  const int T = 512;
  auto set = ConstraintSet::l2_ball(8, 1.0);
  RunConstants constants;
  constants.c_alpha = 2.0;
  PrivIncRegRun run(set, T, {1.0, 1e-5}, 0.05, 1, constants);
  const IncRegParams& p = run.params();
  CHECK(p.eps_tree == doctest::Approx(0.5));
  CHECK(p.delta_tree == doctest::Approx(0.5e-5));
  CHECK(p.kappa == doctest::Approx(tree_error_scale(T, 0.5, 0.5e-5)));
  double expected_alpha = 2.0 * p.kappa * 1.0 *
                          (std::sqrt(8.0) + std::sqrt(std::log(1.0 / (0.05 / T))));
  CHECK(p.alpha_prime == doctest::Approx(expected_alpha));
  CHECK(p.iterations == default_iterations(p.alpha_prime, T * set.diameter()));
}
