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

#include "dpefb/game_tree.hpp"

#include <algorithm>
#include <sstream>

namespace dpefb {

std::vector<NodeId> GameTree::infosets() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v)
    if (is_infoset(v)) out.push_back(v);
  return out;
}

std::vector<NodeId> GameTree::actions() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v)
    if (is_action(v)) out.push_back(v);
  return out;
}

int GameTree::num_actions() const {
  int c = 0;
  for (NodeId v = 0; v < size(); ++v)
    if (is_action(v)) ++c;
  return c;
}

GameTree parse_tree(const std::string& text) {
  struct Line {
    NodeId id;
    NodeKind kind;
    NodeId parent;
    double loss;
  };
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string id_tok, kind_tok, parent_tok;
    if (!(ls >> id_tok)) continue;  // blank line
    if (!(ls >> kind_tok >> parent_tok))
      throw ParseError("line " + std::to_string(lineno) + ": malformed line");
    Line l{};
    try {
      l.id = std::stoi(id_tok);
    } catch (...) {
      throw ParseError("line " + std::to_string(lineno) + ": bad node id");
    }
    if (kind_tok == "I")
      l.kind = NodeKind::Infoset;
    else if (kind_tok == "A")
      l.kind = NodeKind::Action;
    else if (kind_tok == "L")
      l.kind = NodeKind::Leaf;
    else
      throw ParseError("line " + std::to_string(lineno) + ": unknown kind tag '" +
                       kind_tok + "'");
    if (parent_tok == "-") {
      l.parent = kNoNode;
    } else {
      try {
        l.parent = std::stoi(parent_tok);
      } catch (...) {
        throw ParseError("line " + std::to_string(lineno) + ": bad parent id");
      }
    }
    std::string loss_tok;
    if (l.kind == NodeKind::Leaf) {
      if (!(ls >> loss_tok))
        throw ParseError("line " + std::to_string(lineno) + ": leaf missing loss");
      try {
        l.loss = std::stod(loss_tok);
      } catch (...) {
        throw ParseError("line " + std::to_string(lineno) + ": bad loss literal");
      }
      if (!(l.loss >= 0.0 && l.loss <= 1.0))
        throw ParseError("line " + std::to_string(lineno) + ": loss out of range");
    } else if (ls >> loss_tok) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": loss only allowed on L lines");
    }
    lines.push_back(l);
  }
  if (lines.empty()) throw ParseError("no root");
  if (lines.front().parent != kNoNode)
    throw ParseError("root line must come first with '-' parent");

  const int n = static_cast<int>(lines.size());
  GameTree tree;
  tree.nodes.resize(n);
  std::vector<bool> seen(n, false);
  for (int i = 0; i < n; ++i) {
    const Line& l = lines[i];
    if (l.id < 0 || l.id >= n)
      throw ParseError("node id " + std::to_string(l.id) +
                       " not dense in 0.." + std::to_string(n - 1));
    if (seen[l.id])
      throw ParseError("duplicate id " + std::to_string(l.id));
    seen[l.id] = true;
    Node& node = tree.nodes[l.id];
    node.kind = l.kind;
    node.loss = l.loss;
    node.parent = l.parent;
    if (l.parent == kNoNode) {
      if (i != 0) throw ParseError("multiple roots");
      tree.root = l.id;
    } else {
      if (l.parent < 0 || l.parent >= n || !seen[l.parent])
        throw ParseError("parent " + std::to_string(l.parent) +
                         " of node " + std::to_string(l.id) +
                         " must precede it");
      tree.nodes[l.parent].children.push_back(l.id);
    }
  }
  return tree;
}

std::string format_tree(const GameTree& tree) {
  // Emit in a parent-before-child order starting from the root.
  std::ostringstream out;
  std::vector<NodeId> stack{tree.root};
  std::vector<NodeId> order;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    const auto& ch = tree.children(v);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  for (NodeId v : order) {
    const Node& node = tree.node(v);
    out << v << ' ';
    out << (node.kind == NodeKind::Infoset ? 'I'
            : node.kind == NodeKind::Action ? 'A'
                                            : 'L');
    if (node.parent == kNoNode)
      out << " -";
    else
      out << ' ' << node.parent;
    if (node.kind == NodeKind::Leaf) {
      std::ostringstream loss;
      loss.precision(17);
      loss << node.loss;
      out << ' ' << loss.str();
    }
    out << '\n';
  }
  return out.str();
}

std::vector<Violation> validate_tree(const GameTree& tree) {
  std::vector<Violation> out;
  const int n = tree.size();
  if (n == 0) {
    out.push_back({kNoNode, "empty tree"});
    return out;
  }
  if (!tree.is_infoset(tree.root))
    out.push_back({tree.root, "root must be infoset"});
  if (tree.node(tree.root).parent != kNoNode)
    out.push_back({tree.root, "root must have no parent"});

  for (NodeId v = 0; v < n; ++v) {
    const Node& node = tree.node(v);
    for (NodeId c : node.children) {
      if (c < 0 || c >= n) {
        out.push_back({v, "child id out of range"});
        continue;
      }
      if (tree.node(c).parent != v)
        out.push_back({c, "parent/child links inconsistent"});
    }
    switch (node.kind) {
      case NodeKind::Infoset:
        if (node.children.size() < 2)
          out.push_back({v, "|C(v)| > 1 required"});
        for (NodeId c : node.children)
          if (c >= 0 && c < n && !tree.is_action(c))
            out.push_back({v, "infoset child must be action"});
        break;
      case NodeKind::Action:
        if (node.children.empty())
          out.push_back({v, "action needs at least one child"});
        for (NodeId c : node.children)
          if (c >= 0 && c < n && tree.is_action(c))
            out.push_back({v, "action child must be infoset or leaf"});
        break;
      case NodeKind::Leaf:
        if (!node.children.empty())
          out.push_back({v, "leaf must have no children"});
        if (!(node.loss >= 0.0 && node.loss <= 1.0))
          out.push_back({v, "loss out of range"});
        break;
    }
    if (v != tree.root && node.parent == kNoNode)
      out.push_back({v, "non-root node without parent"});
  }

  // Single-root connectivity / acyclicity.
  std::vector<bool> reached(n, false);
  std::vector<NodeId> stack{tree.root};
  reached[tree.root] = true;
  int count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId c : tree.children(v)) {
      if (c < 0 || c >= n) continue;
      if (reached[c]) {
        out.push_back({c, "node reached twice (cycle or shared child)"});
        continue;
      }
      reached[c] = true;
      ++count;
      stack.push_back(c);
    }
  }
  if (count != n)
    out.push_back({kNoNode, "graph is not a single tree rooted at root"});
  return out;
}

namespace {

uint64_t checked_mul(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("exact sub-strategy count overflows 64 bits");
  return r;
}

uint64_t checked_add(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("exact sub-strategy count overflows 64 bits");
  return r;
}

}  // namespace

TreeProfiles compute_profiles(const GameTree& tree) {
  const int n = tree.size();
  TreeProfiles p;
  p.n.assign(n, 0);
  p.m.assign(n, 0);
  p.beta.assign(n, 0.0);

  // Post-order for the up-the-tree recursions.
  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<NodeId> stack{tree.root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (NodeId c : tree.children(v)) stack.push_back(c);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    if (tree.is_leaf(v)) {
      p.n[v] = 1;
      p.m[v] = 0;
      continue;
    }
    if (tree.is_action(v)) {
      uint64_t prod = 1, cnt = 1;
      for (NodeId c : tree.children(v)) {
        if (!tree.is_infoset(c)) continue;
        prod = checked_mul(prod, p.n[c]);
        cnt = checked_add(cnt, p.m[c]);
      }
      p.n[v] = prod;
      p.m[v] = cnt;
    } else {
      uint64_t sum = 0, cnt = 0;
      for (NodeId c : tree.children(v)) {
        sum = checked_add(sum, p.n[c]);
        cnt = checked_add(cnt, p.m[c]);
      }
      p.n[v] = sum;
      p.m[v] = cnt;
    }
  }

  // Pre-order for the down-the-tree beta recursion.
  for (NodeId v : order) {
    if (tree.is_leaf(v)) continue;
    if (v == tree.root) {
      p.beta[v] = 1.0;
    } else if (tree.is_action(v)) {
      p.beta[v] = static_cast<double>(p.m[v]) * p.beta[tree.node(v).parent];
    } else {
      p.beta[v] = p.beta[tree.node(v).parent] / static_cast<double>(p.m[v]);
    }
  }
  return p;
}

PlayOutcome play(const GameTree& tree, const ReducedStrategy& sigma,
                 const Environment& mu) {
  PlayOutcome out;
  NodeId v = tree.root;
  while (true) {
    out.path.push_back(v);
    if (tree.is_leaf(v)) {
      out.loss = tree.node(v).loss;
      return out;
    }
    if (tree.is_infoset(v)) {
      v = sigma.at(v);  // throws if sigma is corrupted
    } else {
      out.last_action = v;
      v = mu.at(v);
    }
  }
}

std::pair<std::set<NodeId>, std::set<NodeId>> reachable_sets(
    const GameTree& tree, const ReducedStrategy& sigma) {
  std::set<NodeId> infosets, actions;
  std::vector<NodeId> stack{tree.root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (tree.is_leaf(v)) continue;
    if (tree.is_infoset(v)) {
      infosets.insert(v);
      stack.push_back(sigma.at(v));
    } else {
      actions.insert(v);
      for (NodeId c : tree.children(v)) stack.push_back(c);
    }
  }
  return {infosets, actions};
}

std::set<NodeId> terminal_actions(const GameTree& tree, const Environment& mu) {
  std::set<NodeId> out;
  std::vector<NodeId> stack{tree.root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (tree.is_leaf(v)) continue;
    if (tree.is_infoset(v)) {
      for (NodeId c : tree.children(v)) stack.push_back(c);
    } else {
      NodeId next = mu.at(v);
      if (tree.is_leaf(next))
        out.insert(v);
      else
        stack.push_back(next);
    }
  }
  return out;
}

std::vector<Environment> enumerate_environments(const GameTree& tree,
                                                uint64_t cap) {
  std::vector<NodeId> actions = tree.actions();
  uint64_t total = 1;
  for (NodeId a : actions) {
    total = checked_mul(total, tree.children(a).size());
    if (total > cap)
      throw std::runtime_error("environment enumeration cap exceeded");
  }
  std::vector<Environment> out;
  out.reserve(total);
  std::vector<size_t> idx(actions.size(), 0);
  while (true) {
    Environment env;
    env.choice.assign(tree.size(), kNoNode);
    for (size_t i = 0; i < actions.size(); ++i)
      env.choice[actions[i]] = tree.children(actions[i])[idx[i]];
    out.push_back(std::move(env));
    // Odometer increment, last action fastest (lexicographic by action id).
    int i = static_cast<int>(actions.size()) - 1;
    while (i >= 0) {
      if (++idx[i] < tree.children(actions[i]).size()) break;
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

}  // namespace dpefb
