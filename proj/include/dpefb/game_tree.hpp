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

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpefb {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind { Infoset, Action, Leaf };

struct Node {
  NodeKind kind = NodeKind::Leaf;
  double loss = 0.0;  // meaningful only for leaves
  NodeId parent = kNoNode;
  std::vector<NodeId> children;  // file order, fixed
};

// One-sided extensive-form game tree: alternating infoset/action levels with
// leaf losses in [0, 1]. Immutable after construction.
struct GameTree {
  std::vector<Node> nodes;
  NodeId root = 0;

  const Node& node(NodeId v) const { return nodes.at(v); }
  int size() const { return static_cast<int>(nodes.size()); }
  bool is_infoset(NodeId v) const { return nodes[v].kind == NodeKind::Infoset; }
  bool is_action(NodeId v) const { return nodes[v].kind == NodeKind::Action; }
  bool is_leaf(NodeId v) const { return nodes[v].kind == NodeKind::Leaf; }
  const std::vector<NodeId>& children(NodeId v) const { return nodes[v].children; }

  std::vector<NodeId> infosets() const;
  std::vector<NodeId> actions() const;
  int num_actions() const;
};

// Per-node profiles:
//   n    - exact reduced sub-strategy count (up-the-tree recursion)
//   m    - number of action descendants, inclusive (up-the-tree recursion)
//   beta - implicit-exploration weight (down-the-tree recursion)
struct TreeProfiles {
  std::vector<uint64_t> n;
  std::vector<uint64_t> m;
  std::vector<double> beta;
};

// Partial map infoset -> chosen child action, with domain exactly the set of
// infosets reachable under those choices.
struct ReducedStrategy {
  std::map<NodeId, NodeId> assignment;

  NodeId at(NodeId infoset) const {
    auto it = assignment.find(infoset);
    if (it == assignment.end())
      throw std::runtime_error("reduced strategy undefined at infoset " +
                               std::to_string(infoset));
    return it->second;
  }
  bool operator==(const ReducedStrategy& o) const { return assignment == o.assignment; }
  bool operator<(const ReducedStrategy& o) const { return assignment < o.assignment; }
};

// Total map action -> chosen child (opponents and chance combined).
struct Environment {
  // Indexed by node id; kNoNode for non-action slots.
  std::vector<NodeId> choice;

  NodeId at(NodeId action) const { return choice.at(action); }
  bool operator==(const Environment& o) const { return choice == o.choice; }
};

struct PlayOutcome {
  std::vector<NodeId> path;  // root .. leaf
  NodeId last_action = kNoNode;
  double loss = 0.0;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Violation {
  NodeId node;
  std::string message;
};

// Line-oriented tree file: `<id> <kind> <parent|-> [loss]`, kind in {I,A,L},
// root first with `-` parent, parents before children, `#` comments.
GameTree parse_tree(const std::string& text);
std::string format_tree(const GameTree& tree);

std::vector<Violation> validate_tree(const GameTree& tree);

TreeProfiles compute_profiles(const GameTree& tree);

PlayOutcome play(const GameTree& tree, const ReducedStrategy& sigma,
                 const Environment& mu);

// (N(sigma), A(sigma)): the infosets and actions reachable under sigma.
std::pair<std::set<NodeId>, std::set<NodeId>> reachable_sets(
    const GameTree& tree, const ReducedStrategy& sigma);

// Z(mu): reachable-under-mu actions whose mu-successor is a leaf.
std::set<NodeId> terminal_actions(const GameTree& tree, const Environment& mu);

// All total environments, lexicographic by action id. Throws if the product
// of child counts exceeds `cap`.
std::vector<Environment> enumerate_environments(const GameTree& tree,
                                                uint64_t cap = 1000000);

}  // namespace dpefb
