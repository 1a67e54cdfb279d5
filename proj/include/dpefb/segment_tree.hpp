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
#include <stdexcept>
#include <vector>

namespace dpefb {

// Sum segment tree over a fixed-size vector of positive weights, supporting
// point-multiplicative updates and weighted index sampling in O(log k).
// Every tree-node visit is charged to an external operation counter so that
// callers can assert complexity bounds.
class WeightSegmentTree {
 public:
  WeightSegmentTree() = default;

  WeightSegmentTree(const std::vector<double>& weights, uint64_t* op_counter)
      : size_(weights.size()), ops_(op_counter) {
    cap_ = 1;
    while (cap_ < size_) cap_ <<= 1;
    node_.assign(2 * cap_, 0.0);
    for (size_t i = 0; i < size_; ++i) {
      node_[cap_ + i] = weights[i];
      charge();
    }
    for (size_t i = cap_ - 1; i >= 1; --i) {
      node_[i] = node_[2 * i] + node_[2 * i + 1];
      charge();
    }
  }

  size_t size() const { return size_; }

  double total() const {
    charge();
    return node_[1];
  }

  double weight(size_t i) const {
    charge();
    return node_[cap_ + i];
  }

  double prob(size_t i) const { return weight(i) / total(); }

  void multiply(size_t i, double factor) {
    size_t p = cap_ + i;
    node_[p] *= factor;
    charge();
    for (p /= 2; p >= 1; p /= 2) {
      node_[p] = node_[2 * p] + node_[2 * p + 1];
      charge();
    }
  }

  // Weighted draw: index i with probability weight(i)/total(), from a single
  // uniform u in [0, 1).
  size_t sample(double u) const {
    double target = u * node_[1];
    size_t p = 1;
    charge();
    while (p < cap_) {
      double left = node_[2 * p];
      charge();
      if (target < left) {
        p = 2 * p;
      } else {
        target -= left;
        p = 2 * p + 1;
      }
    }
    size_t i = p - cap_;
    // Guard against u*total landing past the last live leaf.
    if (i >= size_) i = size_ - 1;
    return i;
  }

  // Multiplies every weight by `factor`; probabilities unchanged. Used to
  // keep the total inside a safe floating-point range.
  void rescale(double factor) {
    for (size_t p = cap_; p < cap_ + size_; ++p) {
      node_[p] *= factor;
      charge();
    }
    for (size_t p = cap_ - 1; p >= 1; --p) {
      node_[p] = node_[2 * p] + node_[2 * p + 1];
      charge();
    }
  }

 private:
  void charge() const {
    if (ops_) ++*ops_;
  }

  size_t size_ = 0;
  size_t cap_ = 0;
  std::vector<double> node_;  // 1-based heap layout, leaves at [cap_, 2*cap_)
  uint64_t* ops_ = nullptr;
};

}  // namespace dpefb
