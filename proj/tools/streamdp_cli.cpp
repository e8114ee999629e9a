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

// Command-line surface: `run` executes one experiment config, `sweep` grids
// over its seed list, `bench` runs the built-in comparison suites, and
// `check` runs the embedding and noise-calibration self-tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamdp/streamdp.hpp"

namespace {

using namespace streamdp;

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailed = 1;
constexpr int kExitBadConfig = 2;

std::optional<std::uint64_t> env_seed() {
  if (const char* env = std::getenv("STREAMDP_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return std::nullopt;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config is not valid json: ") + e.what());
  }
  try {
    return ExperimentConfig::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config schema error: ") + e.what());
  }
}

void write_outputs(const std::filesystem::path& dir, const std::string& stem,
                   const ExperimentConfig& config, std::uint64_t seed, const RunReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
  write_csv(csv, report);
  std::ofstream json_out(dir / (stem + ".json"));
  json_out << summary_json(config, seed, report).dump(2) << "\n";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            const std::string& out_dir) {
  ExperimentConfig config = load_config(config_path);
  // Seed precedence: --seed flag, then STREAMDP_SEED, then the config list.
  std::uint64_t seed = seed_flag          ? *seed_flag
                       : env_seed()       ? *env_seed()
                       : config.seeds.empty() ? 0
                                              : config.seeds.front();
  RunReport report = run_experiment(config, seed);
  std::string stem = algorithm_name(config.algorithm) + "_seed" + std::to_string(seed);
  write_outputs(out_dir, stem, config, seed, report);
  std::cout << "wrote " << out_dir << "/" << stem << ".csv (T=" << config.T
            << ", max_excess=" << report.max_excess << ", opt=" << report.opt << ")\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig config = load_config(config_path);
  if (config.seeds.empty()) throw InvalidInput("sweep: config has no seeds");
  std::vector<double> end_excess;
  for (std::uint64_t seed : config.seeds) {
    RunReport report = run_experiment(config, seed);
    std::string stem = algorithm_name(config.algorithm) + "_seed" + std::to_string(seed);
    write_outputs(out_dir, stem, config, seed, report);
    end_excess.push_back(report.excess_at_end);
    std::cout << "seed " << seed << ": excess_at_end=" << report.excess_at_end << "\n";
  }
  std::cout << "median excess_at_end over " << end_excess.size() << " seeds: "
            << median(end_excess) << "\n";
  return kExitOk;
}

ExperimentConfig d_scaling_config(int d) {
  ExperimentConfig c;
  c.algorithm = Algorithm::PrivIncReg;
  c.T = 512;
  c.d = d;
  c.epsilon = 1.0;
  c.delta = 1e-5;
  c.beta = 0.05;
  c.constraint = ConstraintSet::l2_ball(d, 1.0);
  c.generator.domain = DomainSpec::unit_l2_ball(d);
  c.generator.theta_star = Eigen::VectorXd::Zero(d);
  c.generator.theta_star[0] = 0.5;
  c.generator.noise_sigma = 0.1;
  return c;
}

int cmd_bench_d_scaling(const std::string& out_dir, int seeds) {
  std::cout << "dimension sweep: T=512, eps=1, delta=1e-5, squared loss, unit l2 ball\n";
  std::cout << "d,median_excess_at_T\n";
  std::vector<double> medians;
  for (int d : {2, 8, 32}) {
    ExperimentConfig config = d_scaling_config(d);
    std::vector<double> excesses;
    for (int seed = 0; seed < seeds; ++seed) {
      RunReport report = run_experiment(config, seed);
      if (!out_dir.empty() && seed == 0)
        write_outputs(out_dir, "d_scaling_d" + std::to_string(d), config, seed, report);
      excesses.push_back(report.excess_at_end);
    }
    medians.push_back(median(excesses));
    std::cout << d << "," << medians.back() << "\n";
  }
  std::cout << "ratio d=32 / d=2: " << medians.back() / medians.front() << "\n";
  return kExitOk;
}

ExperimentConfig sparse_head_to_head_config(Algorithm algorithm) {
  ExperimentConfig c;
  c.algorithm = algorithm;
  c.T = 1000;
  c.d = 512;
  c.epsilon = 1.0;
  c.delta = 1e-5;
  c.beta = 0.05;
  c.constraint = ConstraintSet::l1_ball(512, 1.0);
  c.generator.domain = DomainSpec::k_sparse(512, 4);
  c.generator.theta_star = Eigen::VectorXd::Zero(512);
  c.generator.theta_star[3] = 0.25;
  c.generator.theta_star[97] = -0.25;
  c.generator.theta_star[211] = 0.25;
  c.generator.theta_star[402] = 0.25;
  c.generator.noise_sigma = 0.0;
  c.constants.c_m = 0.3;  // desk-scale projected dimension (see README)
  return c;
}

int cmd_bench_proj_vs_tree(const std::string& out_dir, int seeds) {
  std::cout << "sparse head-to-head: d=512, 4-sparse covariates, unit l1 ball, T=1000,"
               " (eps, delta)=(1, 1e-5)\n";
  std::vector<double> plain, projected;
  for (int seed = 0; seed < seeds; ++seed) {
    ExperimentConfig tree_config = sparse_head_to_head_config(Algorithm::PrivIncReg);
    RunReport tree_report = run_experiment(tree_config, seed);
    plain.push_back(tree_report.excess_at_end);

    ExperimentConfig proj_config = sparse_head_to_head_config(Algorithm::ProjPrivIncReg);
    RunReport proj_report = run_experiment(proj_config, seed);
    projected.push_back(proj_report.excess_at_end);
    if (!out_dir.empty() && seed == 0) {
      write_outputs(out_dir, "head_to_head_tree", tree_config, seed, tree_report);
      write_outputs(out_dir, "head_to_head_proj", proj_config, seed, proj_report);
      std::cout << "projected dimension m=" << proj_report.derived["m"]
                << ", gamma=" << proj_report.derived["gamma"] << "\n";
    }
    std::cout << "seed " << seed << ": tree=" << plain.back()
              << " projected=" << projected.back() << "\n";
  }
  double tree_median = median(plain), proj_median = median(projected);
  std::cout << "median excess at T: tree=" << tree_median << " projected=" << proj_median << "\n";
  std::cout << (proj_median < tree_median ? "projected wins\n" : "tree wins\n");
  return kExitOk;
}

int cmd_check(bool disable_noise) {
  int failures = 0;
  auto require = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "[ ok ] " : "[FAIL] ") << what << "\n";
    if (!ok) ++failures;
  };

  {
    // Gaussian mechanism calibration against the sample variance.
    Rng rng(1);
    PrivacyBudget budget(1.0, 1e-4);
    SensitivityBound sensitivity(2.0);
    double expected = gaussian_noise_variance(sensitivity, budget);
    double acc = 0.0, acc2 = 0.0;
    const int n = 100000;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < n; ++i) {
      double y = gaussian_mechanism(zero, sensitivity, budget, rng)[0];
      acc += y;
      acc2 += y * y;
    }
    double var = acc2 / n - (acc / n) * (acc / n);
    require(std::abs(var - expected) <= 0.05 * expected,
            "gaussian mechanism empirical variance within 5%");
  }

  {
    // Inner-product distortion of the formula-sized projection.
    const int d = 512;
    Rng rng(2);
    ProjectionSpec spec = ProjectionSpec::draw(d, 1000, 4.0, 0.05, 1.0, rng);
    auto domain = DomainSpec::k_sparse(d, 4);
    auto set = ConstraintSet::l1_ball(d, 1.0);
    std::vector<Eigen::VectorXd> sample;
    for (int i = 0; i < 23; ++i) sample.push_back(domain.sample(rng));
    for (int i = 0; i < 23; ++i) sample.push_back(set.sample(rng));
    EmbeddingReport report = embedding_check(spec.Phi, sample, spec.gamma);
    std::cout << "       m=" << spec.m << " gamma=" << spec.gamma
              << " violation fraction=" << report.fraction << "\n";
    require(report.fraction <= 0.05, "embedding distortion within gamma on >= 95% of pairs");
  }

  if (disable_noise) {
    ScopedNoiseDisable scoped;
    GeneratorSpec generator;
    generator.domain = DomainSpec::unit_l2_ball(3);
    generator.theta_star = Eigen::VectorXd::Zero(3);
    generator.theta_star[0] = 0.4;
    generator.noise_sigma = 0.05;
    auto set = ConstraintSet::l2_ball(3, 1.0);
    GeneratedStream stream = generate_stream(generator, set, 48, 11);
    IncRegResult run = run_priv_inc_reg(stream.points, set, {1.0, 1e-5}, 0.05, 11);
    LossSpec loss = LossSpec::squared(set);
    bool ok = true;
    for (int t = 1; t <= 48; ++t) {
      std::span<const StreamPoint> prefix(stream.points.data(), t);
      ErmObjective objective(prefix, loss, 3);
      double got = objective.value(run.outputs[t - 1]);
      double best = exact_minimizer(set, objective).risk;
      ok = ok && got - best <= 1e-3 * t;
    }
    require(ok, "zero-noise run tracks the exact minimizer");
    require(std::isinf(run.ledger.total_basic().epsilon),
            "ledger reports infinite epsilon for the noise-free run");
  }

  return failures == 0 ? kExitOk : kExitAssertionFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"private incremental regression workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", suite = "d-scaling";
  std::optional<std::uint64_t> seed_flag;
  int seeds = 0;
  bool disable_noise = false, acknowledged = false;

  auto* run = app.add_subcommand("run", "execute one experiment config");
  run->add_option("--config", config_path, "experiment config (json)")->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = run->add_option("--seed", seed_value, "override the seed");
  run->add_option("--out", out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run every seed in the config");
  sweep->add_option("--config", config_path, "experiment config (json)")->required();
  sweep->add_option("--out", out_dir, "output directory");

  auto* bench = app.add_subcommand("bench", "built-in comparison suites");
  bench->add_option("--suite", suite, "d-scaling | proj-vs-tree")->required();
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--seeds", seeds, "seeds per configuration");

  auto* check = app.add_subcommand("check", "self-tests (embedding, calibration)");
  check->add_flag("--noise-disabled", disable_noise, "also run zero-noise oracle checks");
  check->add_flag("--i-understand-this-is-not-private", acknowledged,
                  "required with --noise-disabled");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) seed_flag = seed_value;
      return cmd_run(config_path, seed_flag, out_dir);
    }
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
    if (bench->parsed()) {
      if (suite == "d-scaling") return cmd_bench_d_scaling(out_dir, seeds > 0 ? seeds : 20);
      if (suite == "proj-vs-tree") return cmd_bench_proj_vs_tree(out_dir, seeds > 0 ? seeds : 10);
      std::cerr << "unknown suite: " << suite << "\n";
      return kExitBadConfig;
    }
    if (check->parsed()) {
      if (disable_noise && !acknowledged) {
        std::cerr << "--noise-disabled requires --i-understand-this-is-not-private\n";
        return kExitBadConfig;
      }
      return cmd_check(disable_noise);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertionFailed;
  }
  return kExitOk;
}
