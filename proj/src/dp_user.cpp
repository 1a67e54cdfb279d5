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

#include "dpefb/dp_user.hpp"

#include <cmath>

namespace dpefb {

double sample_laplace(double epsilon, Rng& rng, double scale_factor) {
  if (!(epsilon > 0.0))
    throw std::runtime_error("sample_laplace: epsilon must be positive");
  const double b = scale_factor * 2.0 / epsilon;
  const double u = rng.next_open_double() - 0.5;  // (-1/2, 1/2)
  const double mag = -b * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -mag : mag;
}

UserReport build_report(const GameTree& tree, const ReducedStrategy& sigma_t,
                        const PlayOutcome& outcome, double epsilon, Rng& rng,
                        double noise_scale_factor) {
  if (!(outcome.loss >= 0.0 && outcome.loss <= 1.0))
    throw std::runtime_error("build_report: loss outside [0,1]");
  auto [infosets, actions] = reachable_sets(tree, sigma_t);
  if (outcome.last_action == kNoNode || !actions.count(outcome.last_action))
    throw std::runtime_error("build_report: outcome inconsistent with sigma_t");
  UserReport report;
  // std::set iteration is id-ordered, so the noise draws are reproducible.
  for (NodeId a : actions) {
    double value = sample_laplace(epsilon, rng, noise_scale_factor);
    if (a == outcome.last_action) value += outcome.loss;
    report.values.emplace(a, value);
  }
  return report;
}

}  // namespace dpefb
