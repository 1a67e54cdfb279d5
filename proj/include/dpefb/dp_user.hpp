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

#include "dpefb/game_tree.hpp"
#include "dpefb/rng.hpp"

namespace dpefb {

// The privatized per-trial report: one noisy value per action reachable
// under sigma_t. This is the only information that crosses from user to
// server.
struct UserReport {
  std::map<NodeId, double> values;  // domain exactly A(sigma_t)
  long long trial = 0;

  double at(NodeId action) const {
    auto it = values.find(action);
    if (it == values.end())
      throw std::runtime_error("report missing action " + std::to_string(action));
    return it->second;
  }
};

// One draw from the Laplace density (eps/4) exp(-(eps/2)|x|), i.e. scale
// 2/eps, via inverse CDF on a uniform in (0,1). Mean 0, variance 8/eps^2.
// `scale_factor` rescales the noise; anything other than 1 breaks the
// privacy guarantee and exists for audit negative controls only.
double sample_laplace(double epsilon, Rng& rng, double scale_factor = 1.0);

// d_t(a) = [a == z_t] * loss + Laplace noise, for every a in A(sigma_t).
UserReport build_report(const GameTree& tree, const ReducedStrategy& sigma_t,
                        const PlayOutcome& outcome, double epsilon, Rng& rng,
                        double noise_scale_factor = 1.0);

}  // namespace dpefb
