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

#include <cmath>
#include <map>
#include <string>

#include "dpefb/dp_user.hpp"
#include "dpefb/game_tree.hpp"
#include "dpefb/harness.hpp"
#include "dpefb/rng.hpp"

namespace dpefb::testing {

// Two-level fixture: root(0) with actions a1(1), a2(2); a1 has leaves
// L(3)=0.3, L(4)=0.7; a2 leads to infoset v2(5) with actions b1(6)->0.0 and
// b2(7)->1.0.
inline const char* kT4 =
    "0 I -\n"
    "1 A 0\n"
    "2 A 0\n"
    "3 L 1 0.3\n"
    "4 L 1 0.7\n"
    "5 I 2\n"
    "6 A 5\n"
    "7 A 5\n"
    "8 L 6 0.0\n"
    "9 L 7 1.0\n";

inline GameTree t4() { return parse_tree(kT4); }

// mu1 sends a1 to the 0.3 leaf, mu2 to the 0.7 leaf; b1/b2 have single
// children either way.
inline Environment t4_mu(int which) {
  GameTree tree = t4();
  Environment env;
  env.choice.assign(tree.size(), kNoNode);
  env.choice[1] = which == 1 ? 3 : 4;
  env.choice[2] = 5;
  env.choice[6] = 8;
  env.choice[7] = 9;
  return env;
}

inline ReducedStrategy sigma_of(std::map<NodeId, NodeId> m) {
  ReducedStrategy s;
  s.assignment = std::move(m);
  return s;
}

// Literal-step reference for the policy update: explicit per-step
// renormalization over a full policy map, no segment trees, no clamping.
// Independent of the production update path.
class ReferenceUpdater {
 public:
  ReferenceUpdater(const GameTree& tree, const TreeProfiles& profiles,
                   double eta, double gamma, std::map<NodeId, double> pi)
      : tree_(tree), profiles_(profiles), eta_(eta), gamma_(gamma),
        pi_(std::move(pi)) {}

  // Applies one update; returns psi at the root.
  double apply(const ReducedStrategy& sigma, const UserReport& report) {
    next_ = pi_;
    double psi = update(tree_.root, 1.0, sigma, report);
    pi_ = next_;
    return psi;
  }

  const std::map<NodeId, double>& policy() const { return pi_; }
  double last_root_omega() const { return last_root_omega_; }

 private:
  double update(NodeId v, double x, const ReducedStrategy& sigma,
                const UserReport& report) {
    NodeId a = sigma.at(v);
    double pi_a = pi_.at(a);
    double child_prod = 1.0;
    for (NodeId c : tree_.children(a))
      if (tree_.is_infoset(c))
        child_prod *= update(c, pi_a * x, sigma, report);
    double omega = std::exp(-eta_ * report.at(a) /
                            (gamma_ * profiles_.beta[a] + pi_a * x)) *
                   child_prod;
    double psi = 1.0 - (1.0 - omega) * pi_a;
    for (NodeId b : tree_.children(v))
      next_[b] = (b == a ? omega * pi_.at(b) : pi_.at(b)) / psi;
    if (v == tree_.root) last_root_omega_ = omega;
    return psi;
  }

  const GameTree& tree_;
  const TreeProfiles& profiles_;
  double eta_, gamma_;
  std::map<NodeId, double> pi_;
  std::map<NodeId, double> next_;
  double last_root_omega_ = 1.0;
};

// Regularized lower incomplete gamma P(s, x), series/continued-fraction.
inline double gammp(double s, double x) {
  if (x < 0.0 || s <= 0.0) return 0.0;
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) {
    double sum = 1.0 / s, term = sum, ap = s;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  // Continued fraction for Q(s, x), then P = 1 - Q.
  double b = x + 1.0 - s, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  double q = std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
  return 1.0 - q;
}

// Chi-square upper-tail p-value with k degrees of freedom.
inline double chi2_pvalue(double stat, int dof) {
  return 1.0 - gammp(dof / 2.0, stat / 2.0);
}

// Random valid tree whose strategy count stays enumerable. Retries with
// fresh draws from `rng` until n(root) <= max_n.
inline GameTree random_small_tree(Rng& rng, int max_depth = 4,
                                  int max_branch = 4, uint64_t max_n = 20000) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    int depth = 1 + static_cast<int>(rng.next_below(max_depth));
    int branch = 2 + static_cast<int>(rng.next_below(max_branch - 1));
    std::string text = generate_random_tree(
        depth, branch, [](Rng& r) { return r.next_double(); }, rng);
    GameTree tree = parse_tree(text);
    try {
      TreeProfiles p = compute_profiles(tree);
      if (p.n[tree.root] <= max_n) return tree;
    } catch (const std::overflow_error&) {
    }
  }
  throw std::runtime_error("random_small_tree: no instance under cap");
}

}  // namespace dpefb::testing
