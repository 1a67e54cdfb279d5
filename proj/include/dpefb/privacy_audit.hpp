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

#include "dpefb/game_tree.hpp"
#include "dpefb/rng.hpp"

namespace dpefb {

struct AuditResult {
  double analytic_sup_log_ratio = 0.0;
  double empirical_max_log_ratio = 0.0;
  int bins_used = 0;
  bool pass = false;
};

// Fixed empirical slack: three sigmas of the log-ratio noise at the minimum
// qualifying bin count of 50.
double audit_slack();

// Supremum over the report space of the log joint-density ratio between the
// report mechanisms under mu and mu_prime, in closed form:
//   (eps/2) * |loss - loss'|   when the two plays end at the same action,
//   (eps/2) * (loss + loss')   otherwise.
// `noise_scale_factor` scales the Laplace parameter, for negative controls.
double analytic_log_ratio_bound(const GameTree& tree,
                                const ReducedStrategy& sigma,
                                const Environment& mu,
                                const Environment& mu_prime, double epsilon,
                                double noise_scale_factor = 1.0);

// Samples reports under both environments and compares per-coordinate
// histograms. Conservative joint statistic: sum over coordinates of the
// per-coordinate max bin log ratio. The verdict combines the analytic
// certificate with the empirical sanity net.
AuditResult empirical_dp_check(const GameTree& tree,
                               const ReducedStrategy& sigma,
                               const Environment& mu,
                               const Environment& mu_prime, double epsilon,
                               long long samples, int bins, Rng& rng,
                               double noise_scale_factor = 1.0);

}  // namespace dpefb
