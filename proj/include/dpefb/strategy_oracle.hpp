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
#include <vector>

#include "dpefb/game_tree.hpp"

namespace dpefb {

// Brute-force and dynamic-programming oracles over the strategy space.
// Pure functions over immutable inputs; the ground truth the server is
// tested against.

struct SubStrategyCatalog {
  NodeId anchor = kNoNode;
  std::vector<ReducedStrategy> strategies;
};

struct BestFixedResult {
  ReducedStrategy sigma_star;
  double total_loss = 0.0;
  std::vector<double> per_trial_loss;
};

// All reduced sub-strategies anchored at `anchor` (an infoset, action or
// leaf). Throws if the exact count exceeds `cap`.
SubStrategyCatalog enumerate_reduced_strategies(const GameTree& tree,
                                                NodeId anchor,
                                                uint64_t cap = 1000000);

// Minimises cumulative loss over the environment sequence by a recursion
// over (node, trial subset). Ties broken towards the lowest action id.
BestFixedResult best_fixed_dp(const GameTree& tree,
                              const std::vector<Environment>& envs);

// Exhaustive minimum over the enumerated strategy set; the oracle for
// best_fixed_dp.
BestFixedResult best_fixed_bruteforce(const GameTree& tree,
                                      const std::vector<Environment>& envs,
                                      uint64_t cap = 1000000);

using PolicyFn = std::function<double(NodeId action)>;

// Sum over sub-strategies anchored at `a` of the product of pi over their
// reachable actions. Equals pi(a) for any valid policy.
double policy_marginal(const GameTree& tree, const PolicyFn& pi, NodeId a,
                       uint64_t cap = 1000000);

// Sum of ln(pi(a)) over the actions reachable under sigma.
double potential_delta(const GameTree& tree, const PolicyFn& pi,
                       const ReducedStrategy& sigma);

}  // namespace dpefb
