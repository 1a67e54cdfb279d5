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

#include "dpefb/strategy_oracle.hpp"

#include <cmath>
#include <limits>

namespace dpefb {

namespace {

void catalog_rec(const GameTree& tree, NodeId v, uint64_t cap,
                 std::vector<ReducedStrategy>& out) {
  if (tree.is_leaf(v)) {
    out.push_back(ReducedStrategy{});
    return;
  }
  if (tree.is_action(v)) {
    out.push_back(ReducedStrategy{});
    for (NodeId c : tree.children(v)) {
      if (!tree.is_infoset(c)) continue;
      std::vector<ReducedStrategy> sub;
      catalog_rec(tree, c, cap, sub);
      std::vector<ReducedStrategy> merged;
      if (out.size() * sub.size() > cap)
        throw std::runtime_error("sub-strategy enumeration cap exceeded");
      merged.reserve(out.size() * sub.size());
      for (const auto& left : out)
        for (const auto& right : sub) {
          ReducedStrategy s = left;
          s.assignment.insert(right.assignment.begin(), right.assignment.end());
          merged.push_back(std::move(s));
        }
      out = std::move(merged);
    }
    return;
  }
  // Infoset: one branch per chosen action, in child order.
  for (NodeId a : tree.children(v)) {
    std::vector<ReducedStrategy> sub;
    catalog_rec(tree, a, cap, sub);
    if (out.size() + sub.size() > cap)
      throw std::runtime_error("sub-strategy enumeration cap exceeded");
    for (auto& s : sub) {
      s.assignment.emplace(v, a);
      out.push_back(std::move(s));
    }
  }
}

// Reachable action set of a sub-strategy anchored at `anchor`.
std::set<NodeId> anchored_actions(const GameTree& tree, NodeId anchor,
                                  const ReducedStrategy& sigma) {
  std::set<NodeId> actions;
  std::vector<NodeId> stack{anchor};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (tree.is_leaf(v)) continue;
    if (tree.is_infoset(v)) {
      stack.push_back(sigma.at(v));
    } else {
      actions.insert(v);
      for (NodeId c : tree.children(v)) stack.push_back(c);
    }
  }
  return actions;
}

struct DpResult {
  double cost = 0.0;
  ReducedStrategy sigma;
};

DpResult best_fixed_rec(const GameTree& tree,
                        const std::vector<Environment>& envs, NodeId v,
                        const std::vector<int>& trials) {
  if (tree.is_leaf(v)) return {};
  if (tree.is_action(v)) {
    DpResult res;
    std::vector<std::vector<int>> split;  // per child, matching trial subsets
    split.resize(tree.children(v).size());
    const auto& ch = tree.children(v);
    for (int t : trials) {
      NodeId next = envs[t].at(v);
      if (tree.is_leaf(next)) {
        res.cost += tree.node(next).loss;
      } else {
        for (size_t i = 0; i < ch.size(); ++i)
          if (ch[i] == next) split[i].push_back(t);
      }
    }
    for (size_t i = 0; i < ch.size(); ++i) {
      if (!tree.is_infoset(ch[i])) continue;
      DpResult sub = best_fixed_rec(tree, envs, ch[i], split[i]);
      res.cost += sub.cost;
      res.sigma.assignment.insert(sub.sigma.assignment.begin(),
                                  sub.sigma.assignment.end());
    }
    return res;
  }
  // Infoset: minimise over available actions, lowest id on ties.
  DpResult best;
  NodeId best_action = kNoNode;
  for (NodeId a : tree.children(v)) {
    DpResult sub = best_fixed_rec(tree, envs, a, trials);
    if (best_action == kNoNode || sub.cost < best.cost ||
        (sub.cost == best.cost && a < best_action)) {
      best = std::move(sub);
      best_action = a;
    }
  }
  best.sigma.assignment.emplace(v, best_action);
  return best;
}

}  // namespace

SubStrategyCatalog enumerate_reduced_strategies(const GameTree& tree,
                                                NodeId anchor, uint64_t cap) {
  SubStrategyCatalog out;
  out.anchor = anchor;
  catalog_rec(tree, anchor, cap, out.strategies);
  return out;
}

BestFixedResult best_fixed_dp(const GameTree& tree,
                              const std::vector<Environment>& envs) {
  if (envs.empty()) throw std::runtime_error("best_fixed_dp: empty env list");
  std::vector<int> all(envs.size());
  for (size_t i = 0; i < envs.size(); ++i) all[i] = static_cast<int>(i);
  DpResult res = best_fixed_rec(tree, envs, tree.root, all);
  BestFixedResult out;
  out.sigma_star = std::move(res.sigma);
  out.per_trial_loss.reserve(envs.size());
  out.total_loss = 0.0;
  for (const Environment& mu : envs) {
    double l = play(tree, out.sigma_star, mu).loss;
    out.per_trial_loss.push_back(l);
    out.total_loss += l;
  }
  return out;
}

BestFixedResult best_fixed_bruteforce(const GameTree& tree,
                                      const std::vector<Environment>& envs,
                                      uint64_t cap) {
  if (envs.empty())
    throw std::runtime_error("best_fixed_bruteforce: empty env list");
  SubStrategyCatalog catalog = enumerate_reduced_strategies(tree, tree.root, cap);
  BestFixedResult best;
  bool have = false;
  for (const ReducedStrategy& sigma : catalog.strategies) {
    std::vector<double> losses;
    losses.reserve(envs.size());
    double total = 0.0;
    for (const Environment& mu : envs) {
      double l = play(tree, sigma, mu).loss;
      losses.push_back(l);
      total += l;
    }
    if (!have || total < best.total_loss) {
      best.sigma_star = sigma;
      best.total_loss = total;
      best.per_trial_loss = std::move(losses);
      have = true;
    }
  }
  return best;
}

double policy_marginal(const GameTree& tree, const PolicyFn& pi, NodeId a,
                       uint64_t cap) {
  if (!tree.is_action(a))
    throw std::runtime_error("policy_marginal: anchor must be an action");
  SubStrategyCatalog catalog = enumerate_reduced_strategies(tree, a, cap);
  double sum = 0.0;
  for (const ReducedStrategy& sigma : catalog.strategies) {
    double prod = 1.0;
    for (NodeId b : anchored_actions(tree, a, sigma)) prod *= pi(b);
    sum += prod;
  }
  return sum;
}

double potential_delta(const GameTree& tree, const PolicyFn& pi,
                       const ReducedStrategy& sigma) {
  auto [infosets, actions] = reachable_sets(tree, sigma);
  double delta = 0.0;
  for (NodeId a : actions) {
    double p = pi(a);
    if (!(p > 0.0))
      throw std::runtime_error("potential_delta: non-positive probability");
    delta += std::log(p);
  }
  return delta;
}

}  // namespace dpefb
