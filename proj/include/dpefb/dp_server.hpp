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

#include <map>
#include <memory>
#include <vector>

#include "dpefb/dp_user.hpp"
#include "dpefb/game_tree.hpp"
#include "dpefb/rng.hpp"
#include "dpefb/segment_tree.hpp"

namespace dpefb {

struct Schedule {
  double epsilon = 0.0;
  long long horizon = 0;
  double eta = 0.0;
  double gamma = 0.0;
};

// Per-infoset categorical distributions over child actions, each backed by a
// weight segment tree. pi(a) = w(a) / W(parent(a)).
class Policy {
 public:
  Policy() = default;
  Policy(const GameTree& tree, const TreeProfiles& profiles,
         uint64_t* op_counter);

  double prob(NodeId action) const;
  WeightSegmentTree& tree_at(NodeId infoset) { return trees_.at(slot_.at(infoset)); }
  const WeightSegmentTree& tree_at(NodeId infoset) const {
    return trees_.at(slot_.at(infoset));
  }
  size_t child_pos(NodeId action) const { return child_pos_.at(action); }

  // Rescales infoset v's weights if the running total left the safe range.
  void maybe_rescale(NodeId infoset);

 private:
  std::vector<int> slot_;        // node id -> index into trees_, -1 otherwise
  std::vector<size_t> child_pos_;  // action id -> position among siblings
  std::vector<NodeId> parent_infoset_;  // action id -> owning infoset
  std::vector<WeightSegmentTree> trees_;
};

struct TrialCounters {
  uint64_t segtree_ops = 0;
  uint64_t clamp_events = 0;
  std::vector<NodeId> nodes_touched;  // infosets and actions visited this trial
};

// Move-only: the policy's segment trees charge into the heap-allocated op
// counter, whose address must stay stable across moves.
struct ServerState {
  const GameTree* tree = nullptr;
  const TreeProfiles* profiles = nullptr;
  Schedule schedule;
  std::unique_ptr<uint64_t> ops = std::make_unique<uint64_t>(0);
  Policy policy;

  TrialCounters trial;        // reset at the start of each sample/update pair
  uint64_t trial_start_ops = 0;
  uint64_t init_ops = 0;      // segment-tree ops spent in init
  uint64_t total_clamp_events = 0;

  uint64_t segtree_ops() const { return *ops; }

  // Step-4 instrumentation from the most recent update, root frame.
  double last_root_omega = 1.0;
  double last_root_pi = 0.0;
  double last_root_psi = 1.0;
};

// eta/gamma schedule from the horizon and privacy budget. epsilon outside
// (0,1) is rejected unless allow_large_epsilon is set.
Schedule compute_schedule(const TreeProfiles& profiles, const GameTree& tree,
                          long long T, double epsilon,
                          bool allow_large_epsilon = false);

// Builds the initial policy pi_1(a) = n(a)/n(parent(a)) in O(|A|).
ServerState init_server(const GameTree& tree, const TreeProfiles& profiles,
                        const Schedule& schedule);

// Draws a reduced strategy by recursive segment-tree descent from the root.
ReducedStrategy sample_strategy(ServerState& state, Rng& rng);

// Product of pi over the actions on the root->a path, inclusive: the
// probability that `a` is reachable under a strategy drawn from the policy.
double reach_probability(const ServerState& state, NodeId a);

// Multiplicative-weights update driven by the privatized report; touches
// only the infosets reachable under sigma_t.
void update_policy(ServerState& state, const ReducedStrategy& sigma_t,
                   const UserReport& report);

// Read-only copy of pi(a) for every action, indexed by node id.
std::map<NodeId, double> snapshot_policy(const ServerState& state);

}  // namespace dpefb
