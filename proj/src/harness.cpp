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

#include "dpefb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "dpefb/strategy_oracle.hpp"

namespace dpefb {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Environment parse_env_pairs(const GameTree& tree, std::istringstream& ls,
                            int lineno) {
  Environment env;
  env.choice.assign(tree.size(), kNoNode);
  std::string tok;
  while (ls >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("env line " + std::to_string(lineno) +
                               ": expected actionId=childId");
    NodeId a, c;
    try {
      a = std::stoi(tok.substr(0, eq));
      c = std::stoi(tok.substr(eq + 1));
    } catch (...) {
      throw std::runtime_error("env line " + std::to_string(lineno) +
                               ": bad id in '" + tok + "'");
    }
    if (a < 0 || a >= tree.size() || !tree.is_action(a))
      throw std::runtime_error("env line " + std::to_string(lineno) + ": node " +
                               std::to_string(a) + " is not an action");
    const auto& ch = tree.children(a);
    if (std::find(ch.begin(), ch.end(), c) == ch.end())
      throw std::runtime_error("env line " + std::to_string(lineno) + ": " +
                               std::to_string(c) + " is not a child of " +
                               std::to_string(a));
    env.choice[a] = c;
  }
  for (NodeId a : tree.actions())
    if (env.choice[a] == kNoNode)
      throw std::runtime_error("env line " + std::to_string(lineno) +
                               ": action " + std::to_string(a) + " unassigned");
  return env;
}

}  // namespace

std::vector<Environment> parse_environment_file(const GameTree& tree,
                                                const std::string& text) {
  std::vector<Environment> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string peek;
    if (!(ls >> peek)) continue;
    ls.clear();
    ls.seekg(0);
    out.push_back(parse_env_pairs(tree, ls, lineno));
  }
  if (out.empty()) throw std::runtime_error("environment file has no entries");
  return out;
}

std::vector<std::pair<Environment, long long>> parse_piecewise_file(
    const GameTree& tree, const std::string& text) {
  std::vector<std::pair<Environment, long long>> out;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    long long length;
    if (!(ls >> length)) continue;
    if (length <= 0)
      throw std::runtime_error("piecewise line " + std::to_string(lineno) +
                               ": nonpositive length");
    out.emplace_back(parse_env_pairs(tree, ls, lineno), length);
  }
  if (out.empty()) throw std::runtime_error("piecewise file has no segments");
  return out;
}

std::vector<Environment> make_environment_sequence(const GameTree& tree,
                                                   const EnvSpec& spec,
                                                   long long T, Rng& rng) {
  std::vector<Environment> out;
  out.reserve(T);
  switch (spec.mode) {
    case EnvSpec::Mode::Fixed: {
      if (spec.fixed.empty())
        throw std::runtime_error("fixed env spec has no environments");
      for (long long t = 0; t < T; ++t)
        out.push_back(spec.fixed[t % spec.fixed.size()]);
      break;
    }
    case EnvSpec::Mode::Piecewise: {
      long long total = 0;
      for (const auto& [env, len] : spec.segments) total += len;
      if (total != T)
        throw std::runtime_error("piecewise segment lengths must sum to T");
      for (const auto& [env, len] : spec.segments)
        for (long long i = 0; i < len; ++i) out.push_back(env);
      break;
    }
    case EnvSpec::Mode::IID: {
      // Validate weights once.
      std::vector<NodeId> actions = tree.actions();
      for (const auto& [a, w] : spec.weights) {
        if (std::find(actions.begin(), actions.end(), a) == actions.end())
          throw std::runtime_error("weights given for non-action node " +
                                   std::to_string(a));
        if (w.size() != tree.children(a).size())
          throw std::runtime_error("weight count mismatch at action " +
                                   std::to_string(a));
        double sum = 0.0;
        for (double x : w) {
          if (x < 0.0)
            throw std::runtime_error("negative env weight at action " +
                                     std::to_string(a));
          sum += x;
        }
        if (!(sum > 0.0))
          throw std::runtime_error("env weights sum to zero at action " +
                                   std::to_string(a));
      }
      for (long long t = 0; t < T; ++t) {
        Environment env;
        env.choice.assign(tree.size(), kNoNode);
        for (NodeId a : actions) {
          const auto& ch = tree.children(a);
          auto it = spec.weights.find(a);
          size_t pick;
          if (it == spec.weights.end()) {
            pick = ch.size() == 1 ? 0 : rng.next_below(ch.size());
          } else {
            const auto& w = it->second;
            double sum = 0.0;
            for (double x : w) sum += x;
            double u = rng.next_double() * sum;
            pick = 0;
            for (; pick + 1 < w.size(); ++pick) {
              if (u < w[pick]) break;
              u -= w[pick];
            }
          }
          env.choice[a] = ch[pick];
        }
        out.push_back(std::move(env));
      }
      break;
    }
  }
  return out;
}

std::string generate_random_tree(int depth, int max_branch,
                                 const LeafLossLaw& loss_law, Rng& rng) {
  if (depth < 1 || max_branch < 2)
    throw std::runtime_error("generate_random_tree: depth >= 1, branch >= 2");
  struct Gen {
    int depth;
    int max_branch;
    const LeafLossLaw& loss_law;
    Rng& rng;
    std::ostringstream out;
    int next_id = 0;

    void leaf(int parent) {
      out << next_id++ << " L " << parent << ' ' << fmt_double(loss_law(rng))
          << '\n';
    }
    void action(int parent, int levels_below) {
      int id = next_id++;
      out << id << " A " << parent << '\n';
      int arity = 1 + static_cast<int>(rng.next_below(max_branch));
      for (int i = 0; i < arity; ++i) {
        if (levels_below == 0 || rng.next_double() < 0.5)
          leaf(id);
        else
          infoset(id, levels_below - 1);
      }
    }
    void infoset(int parent, int levels_below) {
      int id = next_id++;
      if (parent < 0)
        out << id << " I -\n";
      else
        out << id << " I " << parent << '\n';
      int arity = 2 + static_cast<int>(rng.next_below(max_branch - 1));
      for (int i = 0; i < arity; ++i) action(id, levels_below);
    }
  };
  Gen gen{depth, max_branch, loss_law, rng, {}, 0};
  gen.infoset(-1, depth - 1);
  return gen.out.str();
}

namespace {

EnvSpec resolve_env_spec(const ExperimentConfig& config, const GameTree& tree) {
  if (config.env_mode_str.empty()) return config.env;
  EnvSpec spec = config.env;  // keeps seed/weights set programmatically
  if (config.env_mode_str == "iid") {
    spec.mode = EnvSpec::Mode::IID;
  } else if (config.env_mode_str == "fixed") {
    spec.mode = EnvSpec::Mode::Fixed;
    spec.fixed = parse_environment_file(tree, read_file(config.env_file));
  } else if (config.env_mode_str == "piecewise") {
    spec.mode = EnvSpec::Mode::Piecewise;
    spec.segments = parse_piecewise_file(tree, read_file(config.env_file));
  } else {
    throw std::runtime_error("unknown env_mode: " + config.env_mode_str);
  }
  return spec;
}

struct RepOutput {
  std::vector<TrialRecord> records;
  PolicyTrace policy_trace;
  double final_regret = 0.0;
  uint64_t clamp_events = 0;
  uint64_t max_trial_ops = 0;
  uint64_t init_ops = 0;
};

RepOutput run_replication(const GameTree& tree, const TreeProfiles& profiles,
                          const Schedule& schedule,
                          const ExperimentConfig& config, const EnvSpec& spec,
                          int rep) {
  const long long T = config.T;
  Rng env_rng = Rng::derive(spec.seed, 0x456e7653ULL + rep);
  std::vector<Environment> envs = make_environment_sequence(tree, spec, T, env_rng);

  ServerState server = init_server(tree, profiles, schedule);
  Rng server_rng = Rng::derive(config.seed, 2 * rep);
  Rng user_rng = Rng::derive(config.seed, 2 * rep + 1);

  RepOutput out;
  out.init_ops = server.init_ops;
  out.records.resize(T);
  double cum = 0.0;
  for (long long t = 1; t <= T; ++t) {
    ReducedStrategy sigma = sample_strategy(server, server_rng);
    PlayOutcome outcome;
    UserReport report;
    try {
      outcome = play(tree, sigma, envs[t - 1]);
      report = build_report(tree, sigma, outcome, config.epsilon, user_rng);
      update_policy(server, sigma, report);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(t) + ": " + e.what());
    }
    cum += outcome.loss;
    TrialRecord& rec = out.records[t - 1];
    rec.t = t;
    rec.sigma.assign(sigma.assignment.begin(), sigma.assignment.end());
    rec.loss = outcome.loss;
    rec.cum_loss = cum;
    rec.segtree_ops = server.trial.segtree_ops;
    out.max_trial_ops = std::max(out.max_trial_ops, server.trial.segtree_ops);
    if (config.record_policy_every > 0 && t % config.record_policy_every == 0)
      for (const auto& [a, p] : snapshot_policy(server))
        out.policy_trace.emplace_back(t, a, p);
  }
  out.clamp_events = server.total_clamp_events;

  BestFixedResult best = best_fixed_dp(tree, envs);
  double best_cum = 0.0;
  for (long long t = 1; t <= T; ++t) {
    best_cum += best.per_trial_loss[t - 1];
    TrialRecord& rec = out.records[t - 1];
    rec.best_fixed_cum = best_cum;
    rec.regret_estimate = rec.cum_loss - best_cum;
  }
  out.final_regret = out.records.back().regret_estimate;
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  GameTree tree = parse_tree(read_file(config.tree_path));
  auto violations = validate_tree(tree);
  if (!violations.empty())
    throw std::runtime_error("tree fails validation: " + violations[0].message);
  return run_experiment(config, tree);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const GameTree& tree) {
  if (config.T < 2) throw std::runtime_error("config: T >= 2 required");
  if (config.replications < 1)
    throw std::runtime_error("config: replications >= 1 required");
  TreeProfiles profiles = compute_profiles(tree);
  Schedule schedule = compute_schedule(profiles, tree, config.T, config.epsilon,
                                       config.allow_large_epsilon);
  EnvSpec spec = resolve_env_spec(config, tree);

  const int R = config.replications;
  std::vector<RepOutput> reps(R);
  std::vector<std::string> errors(R);
  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      int k = next.fetch_add(1);
      if (k >= R) break;
      try {
        reps[k] = run_replication(tree, profiles, schedule, config, spec, k);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  unsigned n_threads =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(R));
  std::vector<std::thread> threads;
  for (unsigned i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  for (int k = 0; k < R; ++k)
    if (!errors[k].empty())
      throw std::runtime_error("replication " + std::to_string(k) + ": " +
                               errors[k]);

  ExperimentResult result;
  RegretSummary& s = result.summary;
  s.eta = schedule.eta;
  s.gamma = schedule.gamma;
  for (int k = 0; k < R; ++k) {
    s.final_regret.push_back(reps[k].final_regret);
    s.clamp_events += reps[k].clamp_events;
    s.max_trial_ops = std::max(s.max_trial_ops, reps[k].max_trial_ops);
    s.init_ops = std::max(s.init_ops, reps[k].init_ops);
    result.replications.push_back(std::move(reps[k].records));
    result.policy_traces.push_back(std::move(reps[k].policy_trace));
  }
  double sum = 0.0;
  for (double r : s.final_regret) sum += r;
  s.mean = sum / R;
  if (R > 1) {
    double ss = 0.0;
    for (double r : s.final_regret) ss += (r - s.mean) * (r - s.mean);
    s.stderr_ = std::sqrt(ss / (R - 1)) / std::sqrt(static_cast<double>(R));
  }
  const double lnT = std::log(static_cast<double>(config.T));
  const double eps = config.epsilon;
  s.theorem_bound =
      1.0 + 2.0 * std::sqrt((6.0 * lnT / eps +
                             9.0 * (std::exp(1.0) - 2.0) / (eps * eps)) *
                            static_cast<double>(profiles.m[tree.root]) *
                            std::log(static_cast<double>(profiles.n[tree.root])) *
                            static_cast<double>(config.T));

  if (!config.out_prefix.empty())
    write_outputs(result, config, config.out_prefix);
  return result;
}

std::vector<double> best_fixed_prefix(const GameTree& tree,
                                      const std::vector<Environment>& envs) {
  const long long T = static_cast<long long>(envs.size());
  std::vector<long long> checkpoints;
  for (long long c = 1; c < T; c *= 2) checkpoints.push_back(c);
  checkpoints.push_back(T);

  std::vector<double> out(T, 0.0);
  long long lo = 0;  // trials (lo, c] are filled from checkpoint c
  for (long long c : checkpoints) {
    std::vector<Environment> prefix(envs.begin(), envs.begin() + c);
    BestFixedResult best = best_fixed_dp(tree, prefix);
    double cum = 0.0;
    for (long long t = 1; t <= c; ++t) {
      cum += best.per_trial_loss[t - 1];
      if (t > lo) out[t - 1] = cum;
    }
    lo = c;
  }
  return out;
}

std::vector<double> compute_regret_curve(const std::vector<TrialRecord>& records,
                                         const std::vector<double>& best_prefix) {
  if (records.size() != best_prefix.size())
    throw std::runtime_error("compute_regret_curve: length mismatch");
  std::vector<double> out(records.size());
  for (size_t t = 0; t < records.size(); ++t)
    out[t] = records[t].cum_loss - best_prefix[t];
  return out;
}

void write_outputs(const ExperimentResult& result,
                   const ExperimentConfig& config, const std::string& prefix) {
  for (size_t k = 0; k < result.replications.size(); ++k) {
    std::ofstream csv(prefix + "_rep" + std::to_string(k) + ".csv",
                      std::ios::binary);
    if (!csv)
      throw std::runtime_error("cannot write outputs at prefix " + prefix);
    csv << "trial,loss,cum_loss,best_fixed_cum,regret\n";
    for (const TrialRecord& rec : result.replications[k]) {
      csv << rec.t << ',' << fmt_double(rec.loss) << ','
          << fmt_double(rec.cum_loss) << ',' << fmt_double(rec.best_fixed_cum)
          << ',' << fmt_double(rec.regret_estimate) << '\n';
    }
  }
  for (size_t k = 0; k < result.policy_traces.size(); ++k) {
    if (result.policy_traces[k].empty()) continue;
    std::ofstream trace(prefix + "_rep" + std::to_string(k) + "_policy.csv",
                        std::ios::binary);
    trace << "trial,action,pi\n";
    for (const auto& [t, a, p] : result.policy_traces[k])
      trace << t << ',' << a << ',' << fmt_double(p) << '\n';
  }
  std::ofstream summary(prefix + "_summary.txt", std::ios::binary);
  if (!summary)
    throw std::runtime_error("cannot write outputs at prefix " + prefix);
  const RegretSummary& s = result.summary;
  summary << "seed=" << config.seed << '\n'
          << "eta=" << fmt_double(s.eta) << '\n'
          << "gamma=" << fmt_double(s.gamma) << '\n'
          << "epsilon=" << fmt_double(config.epsilon) << '\n'
          << "T=" << config.T << '\n'
          << "final_regret_mean=" << fmt_double(s.mean) << '\n'
          << "final_regret_stderr=" << fmt_double(s.stderr_) << '\n'
          << "theorem_bound=" << fmt_double(s.theorem_bound) << '\n'
          << "clamp_events=" << s.clamp_events << '\n'
          << "max_trial_ops=" << s.max_trial_ops << '\n';
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const GameTree* /*tree_for_envs*/) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    // Trim.
    auto l = raw.find_first_not_of(" \t\r");
    if (l == std::string::npos) continue;
    auto r = raw.find_last_not_of(" \t\r");
    std::string line = raw.substr(l, r - l + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      if (key == "tree")
        config.tree_path = value;
      else if (key == "T")
        config.T = std::stoll(value);
      else if (key == "epsilon")
        config.epsilon = std::stod(value);
      else if (key == "seed")
        config.seed = std::stoull(value);
      else if (key == "replications")
        config.replications = std::stoi(value);
      else if (key == "out_prefix")
        config.out_prefix = value;
      else if (key == "allow_large_epsilon")
        config.allow_large_epsilon = std::stoi(value) != 0;
      else if (key == "record_policy_every")
        config.record_policy_every = std::stoll(value);
      else if (key == "env_mode")
        config.env_mode_str = value;
      else if (key == "env_file")
        config.env_file = value;
      else if (key == "env_seed")
        config.env.seed = std::stoull(value);
      else
        throw std::runtime_error("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": bad value for " + key);
    }
  }
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

}  // namespace dpefb
