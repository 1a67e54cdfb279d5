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

#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "dpefb/dp_server.hpp"
#include "dpefb/game_tree.hpp"
#include "dpefb/rng.hpp"

namespace dpefb {

// How the oblivious environment sequence is produced. The whole sequence is
// materialized before trial 1 and depends only on (spec, env seed).
struct EnvSpec {
  enum class Mode { Fixed, IID, Piecewise };
  Mode mode = Mode::IID;

  // Fixed: cycle through this list.
  std::vector<Environment> fixed;

  // IID: per-action categorical weights over its children; empty means
  // uniform over every action's children.
  std::map<NodeId, std::vector<double>> weights;
  uint64_t seed = 0;

  // Piecewise: (environment, segment length); lengths must sum to T.
  std::vector<std::pair<Environment, long long>> segments;
};

struct ExperimentConfig {
  std::string tree_path;
  long long T = 0;
  double epsilon = 0.0;
  EnvSpec env;
  // Unresolved form, as read from a config file; resolved against the tree
  // when the experiment runs. Modes: "iid" (uniform or weighted), "fixed",
  // "piecewise".
  std::string env_mode_str;
  std::string env_file;
  uint64_t seed = 0;
  int replications = 1;
  std::string out_prefix;  // empty: no files written
  bool allow_large_epsilon = false;
  long long record_policy_every = 0;
};

struct TrialRecord {
  long long t = 0;  // 1-based
  std::vector<std::pair<NodeId, NodeId>> sigma;  // infoset -> action pairs
  double loss = 0.0;
  double cum_loss = 0.0;
  double best_fixed_cum = 0.0;  // cum loss of the full-horizon best strategy
  double regret_estimate = 0.0;
  uint64_t segtree_ops = 0;
};

struct RegretSummary {
  std::vector<double> final_regret;  // per replication
  double mean = 0.0;
  double stderr_ = 0.0;
  double theorem_bound = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  uint64_t clamp_events = 0;
  uint64_t max_trial_ops = 0;
  uint64_t init_ops = 0;
};

// (trial, action id, pi(action)) rows sampled every record_policy_every
// trials.
using PolicyTrace = std::vector<std::tuple<long long, NodeId, double>>;

struct ExperimentResult {
  std::vector<std::vector<TrialRecord>> replications;
  std::vector<PolicyTrace> policy_traces;  // empty unless requested
  RegretSummary summary;
};

std::vector<Environment> make_environment_sequence(const GameTree& tree,
                                                   const EnvSpec& spec,
                                                   long long T, Rng& rng);

// Full protocol loop: schedule, init, then per trial sample -> play ->
// report -> update. Replications run concurrently on independent streams.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const GameTree& tree);

// Cumulative loss of the best fixed strategy per prefix: exact (via the
// best-fixed DP) at logarithmically spaced checkpoints and at T, estimated
// in between by evaluating the next checkpoint's minimiser.
std::vector<double> best_fixed_prefix(const GameTree& tree,
                                      const std::vector<Environment>& envs);

// regret_t = cum_loss_t - best_fixed_prefix_t.
std::vector<double> compute_regret_curve(const std::vector<TrialRecord>& records,
                                         const std::vector<double>& best_prefix);

using LeafLossLaw = std::function<double(Rng&)>;

// Random valid tree as file text: alternating kinds, infoset arity in
// [2, max_branch], action arity in [1, max_branch].
std::string generate_random_tree(int depth, int max_branch,
                                 const LeafLossLaw& loss_law, Rng& rng);

// Per-replication CSVs `<prefix>_rep<k>.csv` plus `<prefix>_summary.txt`
// as line-oriented key=value.
void write_outputs(const ExperimentResult& result,
                   const ExperimentConfig& config, const std::string& prefix);

// Line-oriented `key=value` config; unknown keys are errors. The tree and
// any environment file are loaded relative to the current directory.
ExperimentConfig parse_config_text(const std::string& text,
                                   const GameTree* tree_for_envs = nullptr);
ExperimentConfig load_config_file(const std::string& path);

// One environment per line: whitespace-separated `actionId=childId` pairs
// covering every action; `#` comments.
std::vector<Environment> parse_environment_file(const GameTree& tree,
                                                const std::string& text);

// Piecewise file: `<length> <actionId=childId>...` per line.
std::vector<std::pair<Environment, long long>> parse_piecewise_file(
    const GameTree& tree, const std::string& text);

std::string read_file(const std::string& path);

}  // namespace dpefb
