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

#include "dpefb/privacy_audit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpefb/dp_user.hpp"

namespace dpefb {

double audit_slack() { return 3.0 * std::sqrt(1.0 / 50.0 + 1.0 / 50.0); }

double analytic_log_ratio_bound(const GameTree& tree,
                                const ReducedStrategy& sigma,
                                const Environment& mu,
                                const Environment& mu_prime, double epsilon,
                                double noise_scale_factor) {
  PlayOutcome p = play(tree, sigma, mu);
  PlayOutcome q = play(tree, sigma, mu_prime);
  // For a Laplace location family with scale b the sup of the log-density
  // ratio under a shift s is |s|/b. The joint ratio factorises over the
  // independent coordinates; only the coordinates at the two terminal
  // actions are shifted.
  const double b = noise_scale_factor * 2.0 / epsilon;
  if (p.last_action == q.last_action) return std::abs(p.loss - q.loss) / b;
  return (p.loss + q.loss) / b;
}

namespace {

// Histogram of `values` over [lo, hi) with equal-width bins; out-of-range
// values are dropped (the range is quantile-clipped upstream).
std::vector<long long> histogram(const std::vector<double>& values, double lo,
                                 double hi, int bins) {
  std::vector<long long> counts(bins, 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (v < lo || v >= hi) continue;
    int b = static_cast<int>((v - lo) / width);
    if (b >= 0 && b < bins) ++counts[b];
  }
  return counts;
}

}  // namespace

AuditResult empirical_dp_check(const GameTree& tree,
                               const ReducedStrategy& sigma,
                               const Environment& mu,
                               const Environment& mu_prime, double epsilon,
                               long long samples, int bins, Rng& rng,
                               double noise_scale_factor) {
  if (samples < 100000)
    throw std::runtime_error("empirical_dp_check: need at least 1e5 samples");
  auto [infosets, actions] = reachable_sets(tree, sigma);
  PlayOutcome outcome_p = play(tree, sigma, mu);
  PlayOutcome outcome_q = play(tree, sigma, mu_prime);

  // Per-coordinate sample columns under each environment.
  std::vector<NodeId> coords(actions.begin(), actions.end());
  const size_t k = coords.size();
  std::vector<std::vector<double>> p_samples(k), q_samples(k);
  for (auto& col : p_samples) col.reserve(samples);
  for (auto& col : q_samples) col.reserve(samples);
  for (long long s = 0; s < samples; ++s) {
    UserReport rp =
        build_report(tree, sigma, outcome_p, epsilon, rng, noise_scale_factor);
    UserReport rq =
        build_report(tree, sigma, outcome_q, epsilon, rng, noise_scale_factor);
    for (size_t i = 0; i < k; ++i) {
      p_samples[i].push_back(rp.at(coords[i]));
      q_samples[i].push_back(rq.at(coords[i]));
    }
  }

  constexpr long long kMinBinCount = 50;
  AuditResult result;
  result.bins_used = 0;
  double joint = 0.0;
  for (size_t i = 0; i < k; ++i) {
    // Quantile-clipped common range over the pooled coordinate samples.
    std::vector<double> pooled = p_samples[i];
    pooled.insert(pooled.end(), q_samples[i].begin(), q_samples[i].end());
    std::sort(pooled.begin(), pooled.end());
    const size_t n = pooled.size();
    const double lo = pooled[static_cast<size_t>(0.001 * n)];
    const double hi = pooled[static_cast<size_t>(0.999 * n)];
    if (!(hi > lo)) continue;
    auto hp = histogram(p_samples[i], lo, hi, bins);
    auto hq = histogram(q_samples[i], lo, hi, bins);
    double coord_max = 0.0;
    bool any = false;
    for (int b = 0; b < bins; ++b) {
      if (hp[b] < kMinBinCount || hq[b] < kMinBinCount) continue;
      any = true;
      ++result.bins_used;
      double ratio = std::abs(std::log(static_cast<double>(hp[b]) /
                                       static_cast<double>(hq[b])));
      coord_max = std::max(coord_max, ratio);
    }
    if (!any)
      throw std::runtime_error(
          "empirical_dp_check: no bin reached the minimum count");
    joint += coord_max;
  }
  result.empirical_max_log_ratio = joint;
  result.analytic_sup_log_ratio = analytic_log_ratio_bound(
      tree, sigma, mu, mu_prime, epsilon, noise_scale_factor);
  const bool analytic_ok = result.analytic_sup_log_ratio <= epsilon + 1e-9;
  const bool empirical_ok =
      result.empirical_max_log_ratio <= epsilon + audit_slack();
  result.pass = analytic_ok && empirical_ok;
  return result;
}

}  // namespace dpefb
