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

#include "dpefb/dp_server.hpp"

#include <cmath>

namespace dpefb {

namespace {
constexpr double kExponentClamp = 700.0;
constexpr double kScaleLow = 1e-100;
constexpr double kScaleHigh = 1e+100;
}  // namespace

Policy::Policy(const GameTree& tree, const TreeProfiles& profiles,
               uint64_t* op_counter) {
  const int n = tree.size();
  slot_.assign(n, -1);
  child_pos_.assign(n, 0);
  parent_infoset_.assign(n, kNoNode);
  for (NodeId v = 0; v < n; ++v) {
    if (!tree.is_infoset(v)) continue;
    const auto& ch = tree.children(v);
    std::vector<double> weights(ch.size());
    for (size_t i = 0; i < ch.size(); ++i) {
      weights[i] = static_cast<double>(profiles.n[ch[i]]) /
                   static_cast<double>(profiles.n[v]);
      child_pos_[ch[i]] = i;
      parent_infoset_[ch[i]] = v;
    }
    slot_[v] = static_cast<int>(trees_.size());
    trees_.emplace_back(weights, op_counter);
  }
}

double Policy::prob(NodeId action) const {
  NodeId v = parent_infoset_.at(action);
  if (v == kNoNode)
    throw std::runtime_error("prob: node " + std::to_string(action) +
                             " is not an action");
  const WeightSegmentTree& st = trees_[slot_[v]];
  return st.weight(child_pos_[action]) / st.total();
}

void Policy::maybe_rescale(NodeId infoset) {
  WeightSegmentTree& st = trees_[slot_.at(infoset)];
  double total = st.total();
  if (total < kScaleLow || total > kScaleHigh) st.rescale(1.0 / total);
}

Schedule compute_schedule(const TreeProfiles& profiles, const GameTree& tree,
                          long long T, double epsilon,
                          bool allow_large_epsilon) {
  if (T < 2) throw std::runtime_error("schedule requires T >= 2");
  if (!(epsilon > 0.0))
    throw std::runtime_error("schedule requires epsilon > 0");
  if (epsilon >= 1.0 && !allow_large_epsilon)
    throw std::runtime_error(
        "epsilon >= 1 is outside the private regime; pass "
        "allow_large_epsilon to override");
  const double m_root = static_cast<double>(profiles.m[tree.root]);
  const double n_root = static_cast<double>(profiles.n[tree.root]);
  if (n_root < 2.0)
    throw std::runtime_error("schedule requires n(root) >= 2");
  Schedule s;
  s.epsilon = epsilon;
  s.horizon = T;
  const double lnT = std::log(static_cast<double>(T));
  const double factor =
      6.0 * lnT / epsilon + 9.0 * (std::exp(1.0) - 2.0) / (epsilon * epsilon);
  s.eta = 1.0 / std::sqrt(factor * m_root * static_cast<double>(T) /
                          std::log(n_root));
  s.gamma = 6.0 * lnT * s.eta / epsilon;
  return s;
}

ServerState init_server(const GameTree& tree, const TreeProfiles& profiles,
                        const Schedule& schedule) {
  ServerState state;
  state.tree = &tree;
  state.profiles = &profiles;
  state.schedule = schedule;
  state.policy = Policy(tree, profiles, state.ops.get());
  state.init_ops = *state.ops;
  return state;
}

ReducedStrategy sample_strategy(ServerState& state, Rng& rng) {
  state.trial = TrialCounters{};
  state.trial_start_ops = *state.ops;
  const GameTree& tree = *state.tree;
  ReducedStrategy sigma;
  std::vector<NodeId> pending{tree.root};
  while (!pending.empty()) {
    NodeId v = pending.back();
    pending.pop_back();
    state.trial.nodes_touched.push_back(v);
    WeightSegmentTree& st = state.policy.tree_at(v);
    size_t i = st.sample(rng.next_double());
    NodeId a = tree.children(v)[i];
    state.trial.nodes_touched.push_back(a);
    sigma.assignment.emplace(v, a);
    const auto& ch = tree.children(a);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it)
      if (tree.is_infoset(*it)) pending.push_back(*it);
  }
  state.trial.segtree_ops = *state.ops - state.trial_start_ops;
  return sigma;
}

double reach_probability(const ServerState& state, NodeId a) {
  const GameTree& tree = *state.tree;
  if (!tree.is_action(a))
    throw std::runtime_error("reach_probability: not an action");
  double prod = 1.0;
  NodeId v = a;
  while (v != kNoNode) {
    if (tree.is_action(v)) prod *= state.policy.prob(v);
    v = tree.node(v).parent;
  }
  return prod;
}

namespace {

// Recursive multiplicative-weights step. `x` carries the reach probability
// of the infoset under the pre-update policy; returns psi_t(v).
double update_rec(ServerState& state, NodeId v, double x,
                  const ReducedStrategy& sigma, const UserReport& report) {
  const GameTree& tree = *state.tree;
  state.trial.nodes_touched.push_back(v);
  NodeId a = sigma.at(v);
  state.trial.nodes_touched.push_back(a);

  WeightSegmentTree& st = state.policy.tree_at(v);
  const double w_old_total = st.total();
  const double pi_a = st.weight(state.policy.child_pos(a)) / w_old_total;

  double child_prod = 1.0;
  for (NodeId c : tree.children(a))
    if (tree.is_infoset(c))
      child_prod *= update_rec(state, c, pi_a * x, sigma, report);

  const double d = report.at(a);
  if (!std::isfinite(d))
    throw std::runtime_error("update_policy: non-finite report value");
  const double denom =
      state.schedule.gamma * state.profiles->beta[a] + pi_a * x;
  double exponent = -state.schedule.eta * d / denom;
  if (exponent > kExponentClamp || exponent < -kExponentClamp) {
    exponent = exponent > 0.0 ? kExponentClamp : -kExponentClamp;
    ++state.trial.clamp_events;
    ++state.total_clamp_events;
  }
  const double omega = std::exp(exponent) * child_prod;

  st.multiply(state.policy.child_pos(a), omega);
  const double psi = st.total() / w_old_total;

  if (v == tree.root) {
    state.last_root_omega = omega;
    state.last_root_pi = pi_a;
    state.last_root_psi = psi;
  }
  state.policy.maybe_rescale(v);
  return psi;
}

}  // namespace

void update_policy(ServerState& state, const ReducedStrategy& sigma_t,
                   const UserReport& report) {
  auto [infosets, actions] = reachable_sets(*state.tree, sigma_t);
  if (report.values.size() != actions.size())
    throw std::runtime_error("update_policy: report domain mismatch");
  for (NodeId a : actions)
    if (!report.values.count(a))
      throw std::runtime_error("update_policy: report domain mismatch");
  update_rec(state, state.tree->root, 1.0, sigma_t, report);
  state.trial.segtree_ops = *state.ops - state.trial_start_ops;
}

std::map<NodeId, double> snapshot_policy(const ServerState& state) {
  std::map<NodeId, double> out;
  for (NodeId a : state.tree->actions()) out.emplace(a, state.policy.prob(a));
  return out;
}

}  // namespace dpefb
