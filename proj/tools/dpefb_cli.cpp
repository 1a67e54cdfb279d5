// Copyright 2026 The dpefb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "dpefb/harness.hpp"
#include "dpefb/privacy_audit.hpp"
#include "dpefb/strategy_oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

dpefb::GameTree load_valid_tree(const std::string& path) {
  dpefb::GameTree tree = dpefb::parse_tree(dpefb::read_file(path));
  auto violations = dpefb::validate_tree(tree);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "node " << v.node << ": " << v.message << '\n';
    throw CLI::RuntimeError(kExitValidation);
  }
  return tree;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int cmd_validate(const std::string& path) {
  dpefb::GameTree tree;
  try {
    tree = dpefb::parse_tree(dpefb::read_file(path));
  } catch (const dpefb::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  }
  auto violations = dpefb::validate_tree(tree);
  if (violations.empty()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const auto& v : violations)
    std::cout << "node " << v.node << ": " << v.message << '\n';
  return kExitValidation;
}

int cmd_profile(const std::string& path) {
  dpefb::GameTree tree = load_valid_tree(path);
  dpefb::TreeProfiles p = dpefb::compute_profiles(tree);
  std::cout << "id,kind,n,m,beta\n";
  for (dpefb::NodeId v = 0; v < tree.size(); ++v) {
    if (tree.is_leaf(v)) continue;
    std::cout << v << ',' << (tree.is_infoset(v) ? 'I' : 'A') << ',' << p.n[v]
              << ',' << p.m[v] << ',' << fmt(p.beta[v]) << '\n';
  }
  return kExitOk;
}

int cmd_best_fixed(const std::string& tree_path, const std::string& env_path) {
  dpefb::GameTree tree = load_valid_tree(tree_path);
  auto envs = dpefb::parse_environment_file(tree, dpefb::read_file(env_path));
  dpefb::BestFixedResult best = dpefb::best_fixed_dp(tree, envs);
  std::cout << "total_loss=" << fmt(best.total_loss) << '\n';
  for (const auto& [v, a] : best.sigma_star.assignment)
    std::cout << "sigma " << v << " -> " << a << '\n';
  return kExitOk;
}

int cmd_audit(const std::string& tree_path, double epsilon, long long samples,
              int bins, uint64_t seed, double noise_scale, bool all,
              int sigma_idx, int mu_idx, int mu_prime_idx) {
  dpefb::GameTree tree = load_valid_tree(tree_path);
  auto catalog = dpefb::enumerate_reduced_strategies(tree, tree.root);
  auto envs = dpefb::enumerate_environments(tree);
  dpefb::Rng rng(seed);

  std::cout << "sigma,mu,mu_prime,analytic_sup_log_ratio,"
               "empirical_max_log_ratio,bins_used,verdict\n";
  auto run_one = [&](int si, int mi, int mpi) {
    dpefb::AuditResult res = dpefb::empirical_dp_check(
        tree, catalog.strategies.at(si), envs.at(mi), envs.at(mpi), epsilon,
        samples, bins, rng, noise_scale);
    std::cout << si << ',' << mi << ',' << mpi << ','
              << fmt(res.analytic_sup_log_ratio) << ','
              << fmt(res.empirical_max_log_ratio) << ',' << res.bins_used << ','
              << (res.pass ? "pass" : "fail") << '\n';
    return res.pass;
  };

  bool all_pass = true;
  if (all) {
    for (size_t si = 0; si < catalog.strategies.size(); ++si)
      for (size_t mi = 0; mi < envs.size(); ++mi)
        for (size_t mpi = 0; mpi < envs.size(); ++mpi)
          all_pass = run_one(static_cast<int>(si), static_cast<int>(mi),
                             static_cast<int>(mpi)) &&
                     all_pass;
  } else {
    all_pass = run_one(sigma_idx, mu_idx, mu_prime_idx);
  }
  return all_pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally differentially private bandit learning in "
               "extensive-form games"};
  app.require_subcommand(1);

  std::string tree_path, env_path, config_path;

  auto* validate = app.add_subcommand("validate", "Check a tree file");
  validate->add_option("file", tree_path, "tree file")->required();

  auto* profile = app.add_subcommand("profile", "Print per-node n, m, beta");
  profile->add_option("file", tree_path, "tree file")->required();

  int depth = 2, branch = 2;
  uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-tree", "Generate a random valid tree");
  gen->add_option("--depth", depth, "infoset levels")->required();
  gen->add_option("--branch", branch, "max arity")->required();
  gen->add_option("--seed", seed, "rng seed")->required();

  auto* best = app.add_subcommand("best-fixed", "Best fixed strategy");
  best->add_option("--tree", tree_path, "tree file")->required();
  best->add_option("--envs", env_path, "environment file")->required();

  dpefb::ExperimentConfig overrides;
  auto* sim = app.add_subcommand("simulate", "Run the protocol loop");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--tree", overrides.tree_path);
  auto* optT = sim->add_option("--T", overrides.T);
  auto* opte = sim->add_option("--epsilon", overrides.epsilon);
  auto* opts = sim->add_option("--seed", overrides.seed);
  auto* optr = sim->add_option("--replications", overrides.replications);
  sim->add_option("--out-prefix", overrides.out_prefix);
  sim->add_option("--env-mode", overrides.env_mode_str);
  sim->add_option("--env-file", overrides.env_file);
  sim->add_flag("--allow-large-epsilon", overrides.allow_large_epsilon);

  double epsilon = 0.5, noise_scale = 1.0;
  long long samples = 1000000;
  int bins = 64, sigma_idx = 0, mu_idx = 0, mu_prime_idx = 0;
  bool audit_all = false;
  auto* audit = app.add_subcommand("audit-dp", "Audit report privacy");
  audit->add_option("--tree", tree_path, "tree file")->required();
  audit->add_option("--epsilon", epsilon)->required();
  audit->add_option("--samples", samples);
  audit->add_option("--bins", bins);
  audit->add_option("--seed", seed);
  audit->add_option("--noise-scale", noise_scale,
                    "Laplace scale factor; !=1 is a negative control");
  audit->add_option("--sigma", sigma_idx);
  audit->add_option("--mu", mu_idx);
  audit->add_option("--mu-prime", mu_prime_idx);
  audit->add_flag("--all", audit_all, "all (sigma, mu, mu') triples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(tree_path);
    if (*profile) return cmd_profile(tree_path);
    if (*gen) {
      dpefb::Rng rng(seed);
      std::cout << dpefb::generate_random_tree(
          depth, branch, [](dpefb::Rng& r) { return r.next_double(); }, rng);
      return kExitOk;
    }
    if (*best) return cmd_best_fixed(tree_path, env_path);
    if (*sim) {
      dpefb::ExperimentConfig config = dpefb::load_config_file(config_path);
      if (!overrides.tree_path.empty()) config.tree_path = overrides.tree_path;
      if (optT->count()) config.T = overrides.T;
      if (opte->count()) config.epsilon = overrides.epsilon;
      if (opts->count()) config.seed = overrides.seed;
      if (optr->count()) config.replications = overrides.replications;
      if (!overrides.out_prefix.empty()) config.out_prefix = overrides.out_prefix;
      if (!overrides.env_mode_str.empty())
        config.env_mode_str = overrides.env_mode_str;
      if (!overrides.env_file.empty()) config.env_file = overrides.env_file;
      if (overrides.allow_large_epsilon) config.allow_large_epsilon = true;
      dpefb::ExperimentResult result = dpefb::run_experiment(config);
      const dpefb::RegretSummary& s = result.summary;
      std::cout << "eta=" << fmt(s.eta) << '\n'
                << "gamma=" << fmt(s.gamma) << '\n'
                << "final_regret_mean=" << fmt(s.mean) << '\n'
                << "final_regret_stderr=" << fmt(s.stderr_) << '\n'
                << "theorem_bound=" << fmt(s.theorem_bound) << '\n'
                << "clamp_events=" << s.clamp_events << '\n'
                << "max_trial_ops=" << s.max_trial_ops << '\n';
      return kExitOk;
    }
    if (*audit)
      return cmd_audit(tree_path, epsilon, samples, bins, seed, noise_scale,
                       audit_all, sigma_idx, mu_idx, mu_prime_idx);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const dpefb::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
