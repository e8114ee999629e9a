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

#ifndef STREAMDP_HARNESS_HPP
#define STREAMDP_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "streamdp/dp.hpp"
#include "streamdp/errors.hpp"
#include "streamdp/geometry.hpp"
#include "streamdp/inc_erm.hpp"
#include "streamdp/inc_regression.hpp"
#include "streamdp/optimizer.hpp"
#include "streamdp/projected_regression.hpp"
#include "streamdp/stream.hpp"

namespace streamdp {

inline constexpr int kCsvSchemaVersion = 1;

// Synthetic stream: covariates from the domain spec, responses
// y = clamp(<x, theta*> + w, [-1, 1]) with centered Gaussian w. The clamp
// rate is reported so experiments can keep it negligible.
struct GeneratorSpec {
  DomainSpec domain;
  Eigen::VectorXd theta_star;
  double noise_sigma = 0.0;

  nlohmann::json to_json() const {
    return {{"domain", domain.to_json()},
            {"theta_star", std::vector<double>(theta_star.data(), theta_star.data() + theta_star.size())},
            {"noise_sigma", noise_sigma}};
  }
};

struct GeneratedStream {
  std::vector<StreamPoint> points;
  int clamped = 0;
  double clamp_rate = 0.0;
};

inline GeneratedStream generate_stream(const GeneratorSpec& spec, const ConstraintSet& set,
                                       int T, std::uint64_t seed) {
  if (spec.theta_star.size() != spec.domain.dim)
    throw InvalidInput("generate_stream: theta* dimension mismatch");
  if (!set.contains(spec.theta_star, 1e-9 * set.diameter() + 1e-12))
    throw InvalidInput("generate_stream: theta* outside the constraint set");
  GeneratedStream out;
  out.points.reserve(T);
  Rng rng = Rng(seed).substream(4);
  for (int t = 0; t < T; ++t) {
    StreamPoint z;
    z.x = spec.domain.sample(rng);
    double y = z.x.dot(spec.theta_star);
    if (spec.noise_sigma > 0) y += spec.noise_sigma * rng.gaussian();
    double clamped = std::clamp(y, -1.0, 1.0);
    if (clamped != y) ++out.clamped;
    z.y = clamped;
    out.points.push_back(std::move(z));
  }
  out.clamp_rate = T > 0 ? static_cast<double>(out.clamped) / T : 0.0;
  return out;
}

// One per-timestep row of a run report.
struct ReportRow {
  int t = 0;
  double risk_priv = 0.0;
  double risk_opt = 0.0;   // certified lower envelope of the optimal risk
  double excess = 0.0;
  bool opt_exact = false;  // false where risk_opt is carried forward
  double eps_spent = 0.0;
  double delta_spent = 0.0;
  double lift_residual = 0.0;  // projected algorithm only
  bool flagged = false;
};

struct RunReport {
  std::vector<ReportRow> rows;
  double opt = 0.0;         // minimum empirical risk at the final timestep
  double max_excess = 0.0;
  double excess_at_end = 0.0;
  int m = 0;                // projected dimension (projected algorithm only)
  double gamma = 0.0;       // distortion parameter (projected algorithm only)
  nlohmann::json derived;   // echoed formula quantities
  nlohmann::json ledger;
  int clamped_points = 0;
};

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Risk curves for a stream of outputs. The optimal risk is re-solved exactly
// at powers of two and at T; between checkpoints the last exact value is
// carried forward, which stays a certified lower bound because the optimal
// risk is nondecreasing in t. Excess is floored at zero within tolerance.
inline RunReport excess_risk_curve(std::span<const Eigen::VectorXd> outputs,
                                   std::span<const StreamPoint> stream, const ConstraintSet& set) {
  if (outputs.size() != stream.size())
    throw InvalidInput("excess_risk_curve: outputs and stream length differ");
  const int T = static_cast<int>(stream.size());
  const int d = set.dim();
  RunReport report;
  report.rows.reserve(T);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(d);
  double offset = 0.0;
  double opt_envelope = 0.0;
  Eigen::VectorXd warm = set.project(Eigen::VectorXd::Zero(d));

  for (int t = 1; t <= T; ++t) {
    const StreamPoint& z = stream[t - 1];
    gram.noalias() += z.x * z.x.transpose();
    moment += z.y * z.x;
    offset += z.y * z.y;
    ErmObjective objective(gram, moment, offset);

    ReportRow row;
    row.t = t;
    row.risk_priv = objective.value(outputs[t - 1]);
    row.opt_exact = is_power_of_two(t) || t == T;
    if (row.opt_exact) {
      MinimizeOptions options;
      options.start = warm;
      options.relative_gap_tol = 1e-9;
      options.max_iterations = 500'000;
      MinimizeResult solved = exact_minimizer(set, objective, options);
      warm = solved.theta;
      opt_envelope = std::max(opt_envelope, solved.risk);  // still nondecreasing
    }
    row.risk_opt = opt_envelope;
    row.excess = std::max(row.risk_priv - row.risk_opt, 0.0);
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    report.opt = report.rows.back().risk_opt;
    report.excess_at_end = report.rows.back().excess;
    for (const auto& row : report.rows) report.max_excess = std::max(report.max_excess, row.excess);
  }
  return report;
}

// Deterministic CSV encoding (RFC 4180 framing; all fields numeric, %.17g).
inline void write_csv(std::ostream& out, const RunReport& report) {
  out << "schema_version,t,risk_priv,risk_opt,excess,opt_exact,eps_spent,delta_spent,"
         "m,gamma,lift_residual,flagged\n";
  char buf[512];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%d,%.17g,%.17g,%d\n",
                  kCsvSchemaVersion, row.t, row.risk_priv, row.risk_opt, row.excess,
                  row.opt_exact ? 1 : 0, row.eps_spent, row.delta_spent, report.m, report.gamma,
                  row.lift_residual, row.flagged ? 1 : 0);
    out << buf;
  }
}

// ------------------------------------------------------------------
// Experiment configuration (JSON-backed) and the dispatcher the CLI uses.

enum class Algorithm { IncErm, PrivIncReg, ProjPrivIncReg };

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::PrivIncReg;
  int T = 0;
  int d = 0;
  double epsilon = 1.0;
  double delta = 1e-5;
  double beta = 0.05;
  std::optional<ConstraintSet> constraint;
  GeneratorSpec generator;
  std::vector<std::uint64_t> seeds{0};
  RunConstants constants;
  bool noise_disabled = false;
  // inc_erm only:
  int tau = 0;                      // 0 selects the policy formula
  std::string tau_policy = "convex";
  int batch_iterations = 25;
  // projected algorithm only: supplied widths; negative means estimate.
  double width_domain = -1.0;
  double width_constraint = -1.0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

inline Algorithm algorithm_from_string(const std::string& name) {
  if (name == "inc_erm") return Algorithm::IncErm;
  if (name == "priv_inc_reg") return Algorithm::PrivIncReg;
  if (name == "proj_priv_inc_reg") return Algorithm::ProjPrivIncReg;
  throw InvalidInput("config: unknown algorithm '" + name + "'");
}

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::IncErm: return "inc_erm";
    case Algorithm::PrivIncReg: return "priv_inc_reg";
    case Algorithm::ProjPrivIncReg: return "proj_priv_inc_reg";
  }
  return "?";
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  c.T = j.at("T").get<int>();
  c.d = j.at("d").get<int>();
  c.epsilon = j.at("epsilon").get<double>();
  c.delta = j.at("delta").get<double>();
  c.beta = j.value("beta", 0.05);
  c.constraint = ConstraintSet::from_json(j.at("constraint"));
  c.generator.domain = j.contains("domain") ? DomainSpec::from_json(j.at("domain"))
                                            : DomainSpec::unit_l2_ball(c.d);
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    c.generator.noise_sigma = g.value("noise_sigma", 0.0);
    if (g.contains("theta_star")) {
      auto values = g.at("theta_star").get<std::vector<double>>();
      c.generator.theta_star = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
    } else if (g.contains("theta_star_sparse")) {
      auto indices = g.at("theta_star_sparse").at("indices").get<std::vector<int>>();
      auto values = g.at("theta_star_sparse").at("values").get<std::vector<double>>();
      if (indices.size() != values.size())
        throw InvalidInput("config: theta_star_sparse indices/values length mismatch");
      c.generator.theta_star = Eigen::VectorXd::Zero(c.d);
      for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= c.d)
          throw InvalidInput("config: theta_star_sparse index out of range");
        c.generator.theta_star[indices[i]] = values[i];
      }
    }
  }
  if (c.generator.theta_star.size() == 0)
    c.generator.theta_star = Eigen::VectorXd::Zero(c.d);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("constants")) {
    const auto& k = j.at("constants");
    c.constants.c_alpha = k.value("c_alpha", c.constants.c_alpha);
    c.constants.c_m = k.value("c_m", c.constants.c_m);
    c.constants.iteration_cap = k.value("r_cap", c.constants.iteration_cap);
  }
  c.noise_disabled = j.value("noise_disabled", false);
  c.tau = j.value("tau", 0);
  c.tau_policy = j.value("tau_policy", std::string("convex"));
  c.batch_iterations = j.value("batch_iterations", 25);
  c.width_domain = j.value("width_domain", -1.0);
  c.width_constraint = j.value("width_constraint", -1.0);
  if (c.T < 1 || c.d < 1) throw InvalidInput("config: T and d must be positive");
  if (c.constraint->dim() != c.d || c.generator.domain.dim != c.d)
    throw InvalidInput("config: dimension mismatch between d, constraint, and domain");
  return c;
}

inline nlohmann::json ExperimentConfig::to_json() const {
  return {{"algorithm", algorithm_name(algorithm)},
          {"T", T},
          {"d", d},
          {"epsilon", epsilon},
          {"delta", delta},
          {"beta", beta},
          {"constraint", constraint->to_json()},
          {"domain", generator.domain.to_json()},
          {"generator", generator.to_json()},
          {"seeds", seeds},
          {"constants",
           {{"c_alpha", constants.c_alpha}, {"c_m", constants.c_m}, {"r_cap", constants.iteration_cap}}},
          {"noise_disabled", noise_disabled},
          {"tau", tau},
          {"tau_policy", tau_policy},
          {"batch_iterations", batch_iterations},
          {"width_domain", width_domain},
          {"width_constraint", width_constraint}};
}

// Width inputs for the projected algorithm: user-supplied scalars, or Monte
// Carlo estimates when unset.
inline std::pair<double, double> resolve_widths(const ExperimentConfig& config,
                                                std::uint64_t seed) {
  double wd = config.width_domain;
  double wc = config.width_constraint;
  Rng rng = Rng(seed).substream(5);
  if (wd < 0) wd = estimate_gaussian_width(config.generator.domain, 2000, rng).mean;
  if (wc < 0) wc = estimate_gaussian_width(*config.constraint, 2000, rng).mean;
  return {wd, wc};
}

// Runs one seed of the configured experiment and assembles the full report.
inline RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  ScopedNoiseDisable scoped(config.noise_disabled || noise_disabled());
  const ConstraintSet& set = *config.constraint;
  GeneratedStream stream = generate_stream(config.generator, set, config.T, seed);

  std::vector<Eigen::VectorXd> outputs;
  std::vector<double> lift_residuals;
  std::vector<bool> flagged;
  std::vector<EpsDelta> spent;  // cumulative committed budget per timestep
  nlohmann::json derived;
  nlohmann::json ledger;

  switch (config.algorithm) {
    case Algorithm::PrivIncReg: {
      IncRegResult r = run_priv_inc_reg(stream.points, set, {config.epsilon, config.delta},
                                        config.beta, seed, config.constants);
      outputs = std::move(r.outputs);
      flagged.assign(r.flagged.begin(), r.flagged.end());
      // Both trees are committed before the first point arrives.
      spent.assign(outputs.size(), {config.epsilon, config.delta});
      derived = {{"kappa", r.params.kappa},
                 {"alpha_prime", r.params.alpha_prime},
                 {"r", r.params.iterations},
                 {"eps_tree", r.params.eps_tree},
                 {"delta_tree", r.params.delta_tree},
                 {"beta_per_step", r.params.beta_per_step}};
      ledger = r.ledger.to_json(config.delta / 2);
      break;
    }
    case Algorithm::ProjPrivIncReg: {
      auto [wd, wc] = resolve_widths(config, seed);
      ProjIncRegResult r =
          run_proj_priv_inc_reg(stream.points, set, {config.epsilon, config.delta}, config.beta,
                                wd, wc, seed, config.constants);
      outputs = std::move(r.outputs);
      lift_residuals = std::move(r.lift_residuals);
      flagged.assign(r.flagged.begin(), r.flagged.end());
      spent.assign(outputs.size(), {config.epsilon, config.delta});
      derived = {{"kappa", r.params.kappa},
                 {"alpha_prime", r.params.alpha_prime},
                 {"r", r.params.iterations},
                 {"gamma", r.params.gamma},
                 {"m", r.params.m},
                 {"width_sum", r.params.width_sum},
                 {"width_domain", wd},
                 {"width_constraint", wc},
                 {"eps_tree", r.params.eps_tree},
                 {"delta_tree", r.params.delta_tree}};
      ledger = r.ledger.to_json(config.delta / 2);
      break;
    }
    case Algorithm::IncErm: {
      LossSpec loss = LossSpec::squared(set);
      int tau = config.tau;
      if (tau <= 0) {
        TauParams p;
        p.T = config.T;
        p.d = config.d;
        p.epsilon = config.epsilon;
        p.lipschitz = loss.lipschitz;
        p.diameter = set.diameter();
        p.strong_convexity = loss.strong_convexity;
        p.curvature = loss.curvature;
        Rng rng = Rng(seed).substream(5);
        p.width = estimate_gaussian_width(set, 2000, rng).mean;
        TauPolicy policy = config.tau_policy == "strongly_convex" ? TauPolicy::StronglyConvex
                           : config.tau_policy == "low_width"     ? TauPolicy::LowWidth
                                                                  : TauPolicy::Convex;
        tau = choose_tau(policy, p);
      }
      IncErmConfig erm;
      erm.T = config.T;
      erm.budget = PrivacyBudget(config.epsilon, config.delta);
      erm.tau = tau;
      erm.solver.iterations = config.batch_iterations;
      erm.seed = seed;
      IncErmResult r = run_inc_erm(stream.points, set, loss, erm);
      outputs = std::move(r.outputs);
      spent.reserve(outputs.size());
      for (int t = 1; t <= config.T; ++t) {
        int checkpoints = t / tau;
        spent.push_back(checkpoints == 0
                            ? EpsDelta{0.0, 0.0}
                            : compose_advanced(checkpoints, r.per_call.epsilon,
                                               r.per_call.delta, config.delta / 2));
      }
      derived = {{"tau", tau},
                 {"eps_call", r.per_call.epsilon},
                 {"delta_call", r.per_call.delta},
                 {"failed_checkpoints", r.failed_checkpoints}};
      ledger = r.ledger.to_json(config.delta / 2);
      break;
    }
  }

  RunReport report = excess_risk_curve(outputs, stream.points, set);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (i < spent.size()) {
      report.rows[i].eps_spent = spent[i].epsilon;
      report.rows[i].delta_spent = spent[i].delta;
    }
    if (i < lift_residuals.size()) report.rows[i].lift_residual = lift_residuals[i];
    if (i < flagged.size()) report.rows[i].flagged = flagged[i];
  }
  if (derived.contains("m")) {
    report.m = derived["m"].get<int>();
    report.gamma = derived["gamma"].get<double>();
  }
  report.derived = std::move(derived);
  report.ledger = std::move(ledger);
  report.clamped_points = stream.clamped;
  return report;
}

inline nlohmann::json summary_json(const ExperimentConfig& config, std::uint64_t seed,
                                   const RunReport& report) {
  return {{"config", config.to_json()},
          {"seed", seed},
          {"opt", report.opt},
          {"max_excess", report.max_excess},
          {"excess_at_end", report.excess_at_end},
          {"clamped_points", report.clamped_points},
          {"derived", report.derived},
          {"ledger", report.ledger},
          {"csv_schema_version", kCsvSchemaVersion}};
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median: empty sample");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace streamdp

#endif  // STREAMDP_HARNESS_HPP
