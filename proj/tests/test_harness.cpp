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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>

#include "dpefb/harness.hpp"
#include "dpefb/strategy_oracle.hpp"
#include "test_support.hpp"

using namespace dpefb;
using namespace dpefb::testing;

TEST_CASE("make_environment_sequence fixed mode cycles") {
  GameTree tree = t4();
  EnvSpec spec;
  spec.mode = EnvSpec::Mode::Fixed;
  spec.fixed = {t4_mu(1), t4_mu(2)};
  Rng rng(0);
  auto seq = make_environment_sequence(tree, spec, 4, rng);
  REQUIRE(seq.size() == 4);
  CHECK(seq[0] == t4_mu(1));
  CHECK(seq[1] == t4_mu(2));
  CHECK(seq[2] == t4_mu(1));
  CHECK(seq[3] == t4_mu(2));

  spec.fixed.clear();
  CHECK_THROWS(make_environment_sequence(tree, spec, 4, rng));
}

TEST_CASE("make_environment_sequence iid mode") {
  GameTree tree = t4();
  EnvSpec spec;
  spec.mode = EnvSpec::Mode::IID;

  // Degenerate weights: probability 1 on the 0.7 leaf for a1.
  spec.weights[1] = {0.0, 1.0};
  Rng rng(3);
  auto seq = make_environment_sequence(tree, spec, 10, rng);
  for (const Environment& mu : seq) CHECK(mu.at(1) == 4);

  // Identical seed, identical sequence (obliviousness contract).
  spec.weights.clear();
  Rng r1(17), r2(17);
  auto s1 = make_environment_sequence(tree, spec, 50, r1);
  auto s2 = make_environment_sequence(tree, spec, 50, r2);
  for (size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);

  // Invalid weight specs.
  EnvSpec bad = spec;
  bad.weights[0] = {1.0};  // not an action
  CHECK_THROWS(make_environment_sequence(tree, bad, 5, rng));
  bad = spec;
  bad.weights[1] = {1.0};  // wrong arity
  CHECK_THROWS(make_environment_sequence(tree, bad, 5, rng));
  bad = spec;
  bad.weights[1] = {-1.0, 2.0};
  CHECK_THROWS(make_environment_sequence(tree, bad, 5, rng));
  bad = spec;
  bad.weights[1] = {0.0, 0.0};
  CHECK_THROWS(make_environment_sequence(tree, bad, 5, rng));
}

TEST_CASE("make_environment_sequence piecewise mode") {
  GameTree tree = t4();
  EnvSpec spec;
  spec.mode = EnvSpec::Mode::Piecewise;
  spec.segments = {{t4_mu(1), 3}, {t4_mu(2), 2}};
  Rng rng(0);
  auto seq = make_environment_sequence(tree, spec, 5, rng);
  REQUIRE(seq.size() == 5);
  for (int i = 0; i < 3; ++i) CHECK(seq[i] == t4_mu(1));
  for (int i = 3; i < 5; ++i) CHECK(seq[i] == t4_mu(2));

  CHECK_THROWS(make_environment_sequence(tree, spec, 6, rng));
}

TEST_CASE("generate_random_tree") {
  Rng rng(101);
  std::string text = generate_random_tree(
      1, 2, [](Rng& r) { return r.next_double(); }, rng);
  GameTree tree = parse_tree(text);
  CHECK(validate_tree(tree).empty());

  Rng a(55), b(55);
  auto law = [](Rng& r) { return r.next_double(); };
  CHECK(generate_random_tree(3, 3, law, a) ==
        generate_random_tree(3, 3, law, b));

  for (int it = 0; it < 200; ++it) {
    int depth = 1 + static_cast<int>(rng.next_below(4));
    int branch = 2 + static_cast<int>(rng.next_below(3));
    GameTree g = parse_tree(generate_random_tree(depth, branch, law, rng));
    CHECK(validate_tree(g).empty());
  }

  CHECK_THROWS(generate_random_tree(0, 2, law, rng));
  CHECK_THROWS(generate_random_tree(1, 1, law, rng));
}

TEST_CASE("parse_environment_file on T4") {
  GameTree tree = t4();
  auto envs = parse_environment_file(tree,
                                     "# two trials\n"
                                     "1=3 2=5 6=8 7=9\n"
                                     "1=4 2=5 6=8 7=9\n");
  REQUIRE(envs.size() == 2);
  CHECK(envs[0] == t4_mu(1));
  CHECK(envs[1] == t4_mu(2));

  CHECK_THROWS(parse_environment_file(tree, "1=3 2=5 6=8\n"));  // 7 unassigned
  CHECK_THROWS(parse_environment_file(tree, "1=9 2=5 6=8 7=9\n"));  // bad child
  CHECK_THROWS(parse_environment_file(tree, "0=1 1=3 2=5 6=8 7=9\n"));
  CHECK_THROWS(parse_environment_file(tree, "# nothing\n"));
}

TEST_CASE("parse_piecewise_file on T4") {
  GameTree tree = t4();
  auto segs = parse_piecewise_file(tree,
                                   "3 1=3 2=5 6=8 7=9\n"
                                   "2 1=4 2=5 6=8 7=9\n");
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].second == 3);
  CHECK(segs[0].first == t4_mu(1));
  CHECK(segs[1].second == 2);

  CHECK_THROWS(parse_piecewise_file(tree, "0 1=3 2=5 6=8 7=9\n"));
  CHECK_THROWS(parse_piecewise_file(tree, "\n"));
}

TEST_CASE("parse_config_text") {
  ExperimentConfig c = parse_config_text(
      "# experiment\n"
      "tree=t4.tree\n"
      "T=100\n"
      "epsilon=0.5\n"
      "seed=42\n"
      "replications=3\n"
      "env_mode=iid\n"
      "env_seed=7\n"
      "out_prefix=run\n"
      "record_policy_every=10\n");
  CHECK(c.tree_path == "t4.tree");
  CHECK(c.T == 100);
  CHECK(c.epsilon == doctest::Approx(0.5));
  CHECK(c.seed == 42);
  CHECK(c.replications == 3);
  CHECK(c.env_mode_str == "iid");
  CHECK(c.env.seed == 7);
  CHECK(c.out_prefix == "run");
  CHECK(c.record_policy_every == 10);

  CHECK_THROWS(parse_config_text("bogus_key=1\n"));
  CHECK_THROWS(parse_config_text("T=abc\n"));
  CHECK_THROWS(parse_config_text("just a line\n"));
}

TEST_CASE("run_experiment smoke on T4") {
  GameTree tree = t4();
  ExperimentConfig config;
  config.T = 2;
  config.epsilon = 0.5;
  config.seed = 9;
  config.replications = 1;
  config.env.mode = EnvSpec::Mode::IID;
  config.env.seed = 1;

  ExperimentResult result = run_experiment(config, tree);
  REQUIRE(result.replications.size() == 1);
  REQUIRE(result.replications[0].size() == 2);
  for (const TrialRecord& rec : result.replications[0]) {
    CHECK(rec.loss >= 0.0);
    CHECK(rec.loss <= 1.0);
    CHECK(rec.regret_estimate ==
          doctest::Approx(rec.cum_loss - rec.best_fixed_cum).epsilon(1e-12));
  }
  CHECK(result.summary.theorem_bound > 1.0);
  CHECK(result.summary.eta > 0.0);

  config.T = 1;
  CHECK_THROWS(run_experiment(config, tree));
  config.T = 2;
  config.replications = 0;
  CHECK_THROWS(run_experiment(config, tree));
}

TEST_CASE("regret curve on an all-mu1 adversary") {
  GameTree tree = t4();
  std::vector<Environment> envs(16, t4_mu(1));
  // Best fixed reaches the zero-loss leaf through b1 at every prefix.
  std::vector<double> prefix = best_fixed_prefix(tree, envs);
  for (double x : prefix) CHECK(x == doctest::Approx(0.0));

  std::vector<TrialRecord> records(envs.size());
  double cum = 0.0;
  for (size_t t = 0; t < records.size(); ++t) {
    records[t].t = static_cast<long long>(t + 1);
    records[t].loss = 0.3;
    cum += 0.3;
    records[t].cum_loss = cum;
  }
  auto curve = compute_regret_curve(records, prefix);
  REQUIRE(curve.size() == records.size());
  CHECK(curve.back() == doctest::Approx(cum).epsilon(1e-12));

  CHECK_THROWS(compute_regret_curve(records, std::vector<double>(3, 0.0)));
}

TEST_CASE("best_fixed_prefix is exact at checkpoints") {
  GameTree tree = t4();
  Rng rng(66);
  EnvSpec spec;
  spec.mode = EnvSpec::Mode::IID;
  std::vector<Environment> envs = make_environment_sequence(tree, spec, 13, rng);
  std::vector<double> prefix = best_fixed_prefix(tree, envs);
  for (long long c : {1, 2, 4, 8, 13}) {
    std::vector<Environment> head(envs.begin(), envs.begin() + c);
    CHECK(prefix[c - 1] ==
          doctest::Approx(best_fixed_dp(tree, head).total_loss).epsilon(1e-12));
  }
  // Estimates never undercut the true prefix minimum.
  for (long long t = 1; t <= 13; ++t) {
    std::vector<Environment> head(envs.begin(), envs.begin() + t);
    CHECK(prefix[t - 1] >=
          best_fixed_dp(tree, head).total_loss - 1e-12);
  }
}

TEST_CASE("determinism: identical config gives byte-identical outputs") {
  GameTree tree = t4();
  ExperimentConfig config;
  config.T = 200;
  config.epsilon = 0.5;
  config.seed = 77;
  config.replications = 2;
  config.env.mode = EnvSpec::Mode::IID;
  config.env.seed = 5;

  config.out_prefix = "det_a";
  run_experiment(config, tree);
  config.out_prefix = "det_b";
  run_experiment(config, tree);

  for (int k = 0; k < 2; ++k) {
    std::string rep = "_rep" + std::to_string(k) + ".csv";
    CHECK(read_file("det_a" + rep) == read_file("det_b" + rep));
    std::remove(("det_a" + rep).c_str());
    std::remove(("det_b" + rep).c_str());
  }
  CHECK(read_file("det_a_summary.txt") == read_file("det_b_summary.txt"));
  std::remove("det_a_summary.txt");
  std::remove("det_b_summary.txt");
}

TEST_CASE("obliviousness: env sequence ignores the algorithm seed") {
  GameTree tree = t4();
  ExperimentConfig config;
  config.T = 100;
  config.epsilon = 0.5;
  config.replications = 1;
  config.env.mode = EnvSpec::Mode::IID;
  config.env.seed = 123;

  config.seed = 1;
  ExperimentResult a = run_experiment(config, tree);
  config.seed = 2;
  ExperimentResult b = run_experiment(config, tree);
  // Different algorithm randomness, same adversary: the best-fixed column
  // (a function of the environment sequence alone) must agree.
  for (long long t = 0; t < config.T; ++t)
    CHECK(a.replications[0][t].best_fixed_cum ==
          doctest::Approx(b.replications[0][t].best_fixed_cum).epsilon(1e-12));
}

TEST_CASE("information flow: updates depend only on sigma and the report") {
  GameTree tree = t4();
  TreeProfiles p = compute_profiles(tree);
  Schedule sched = compute_schedule(p, tree, 100, 0.5);
  ServerState live = init_server(tree, p, sched);
  ServerState replay = init_server(tree, p, sched);

  Rng server_rng(31), user_rng(32), env_rng(33);
  EnvSpec spec;
  spec.mode = EnvSpec::Mode::IID;
  auto envs = make_environment_sequence(tree, spec, 50, env_rng);

  for (int t = 0; t < 50; ++t) {
    ReducedStrategy sigma = sample_strategy(live, server_rng);
    PlayOutcome outcome = play(tree, sigma, envs[t]);
    UserReport report = build_report(tree, sigma, outcome, 0.5, user_rng);
    update_policy(live, sigma, report);
    // The replay server never sees mu, the loss, or the path.
    update_policy(replay, sigma, report);

    auto sl = snapshot_policy(live);
    auto sr = snapshot_policy(replay);
    for (const auto& [a, v] : sl)
      CHECK(sr.at(a) == doctest::Approx(v).epsilon(1e-15));
  }
}

TEST_CASE("policy trace is recorded when requested") {
  GameTree tree = t4();
  ExperimentConfig config;
  config.T = 20;
  config.epsilon = 0.5;
  config.seed = 4;
  config.replications = 1;
  config.env.mode = EnvSpec::Mode::IID;
  config.record_policy_every = 10;

  ExperimentResult result = run_experiment(config, tree);
  REQUIRE(result.policy_traces.size() == 1);
  // Two snapshots (t=10, 20) of 4 actions each.
  CHECK(result.policy_traces[0].size() == 8);
  for (const auto& [t, a, prob] : result.policy_traces[0]) {
    CHECK((t == 10 || t == 20));
    CHECK(prob >= 0.0);
    CHECK(prob <= 1.0);
  }
}
