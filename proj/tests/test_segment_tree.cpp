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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dpefb/rng.hpp"
#include "dpefb/segment_tree.hpp"

using namespace dpefb;

TEST_CASE("totals and point multiplies") {
  uint64_t ops = 0;
  WeightSegmentTree st({1.0, 2.0, 3.0, 4.0, 5.0}, &ops);
  CHECK(st.size() == 5);
  CHECK(st.total() == doctest::Approx(15.0));
  CHECK(st.weight(2) == doctest::Approx(3.0));
  CHECK(st.prob(4) == doctest::Approx(5.0 / 15.0));

  st.multiply(2, 0.5);
  CHECK(st.weight(2) == doctest::Approx(1.5));
  CHECK(st.total() == doctest::Approx(13.5));

  st.multiply(0, 3.0);
  CHECK(st.total() == doctest::Approx(15.5));
}

TEST_CASE("sample hits the weighted index") {
  uint64_t ops = 0;
  WeightSegmentTree st({1.0, 2.0, 1.0}, &ops);
  // Cumulative boundaries at 1/4 and 3/4 of the total.
  CHECK(st.sample(0.0) == 0);
  CHECK(st.sample(0.24) == 0);
  CHECK(st.sample(0.26) == 1);
  CHECK(st.sample(0.74) == 1);
  CHECK(st.sample(0.76) == 2);
  CHECK(st.sample(0.999999) == 2);
}

TEST_CASE("sample matches weights empirically") {
  uint64_t ops = 0;
  std::vector<double> w = {0.2, 1.0, 3.5, 0.01, 2.0, 0.7};
  WeightSegmentTree st(w, &ops);
  double total = 0.0;
  for (double x : w) total += x;

  Rng rng(42);
  const int draws = 200000;
  std::vector<int> counts(w.size(), 0);
  for (int i = 0; i < draws; ++i) ++counts[st.sample(rng.next_double())];
  for (size_t i = 0; i < w.size(); ++i) {
    double p = w[i] / total;
    double se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(counts[i] / static_cast<double>(draws) - p) < 5 * se + 1e-4);
  }
}

TEST_CASE("rescale preserves probabilities") {
  uint64_t ops = 0;
  WeightSegmentTree st({1.0, 2.0, 3.0}, &ops);
  std::vector<double> before = {st.prob(0), st.prob(1), st.prob(2)};
  st.rescale(1e-50);
  CHECK(st.total() == doctest::Approx(6e-50));
  for (size_t i = 0; i < 3; ++i)
    CHECK(st.prob(i) == doctest::Approx(before[i]).epsilon(1e-12));
}

TEST_CASE("operation accounting is logarithmic") {
  for (size_t k : {2u, 3u, 5u, 8u, 17u, 33u}) {
    uint64_t ops = 0;
    std::vector<double> w(k, 1.0);
    WeightSegmentTree st(w, &ops);
    uint64_t build = ops;
    CHECK(build <= 4 * k);  // leaves plus internal sums

    size_t cap = 1;
    int levels = 0;
    while (cap < k) {
      cap <<= 1;
      ++levels;
    }

    ops = 0;
    st.sample(0.3);
    CHECK(ops == static_cast<uint64_t>(levels) + 1);

    ops = 0;
    st.multiply(k / 2, 0.5);
    CHECK(ops == static_cast<uint64_t>(levels) + 1);

    ops = 0;
    st.total();
    st.weight(0);
    CHECK(ops == 2);
  }
}

TEST_CASE("null counter is allowed") {
  WeightSegmentTree st({1.0, 1.0}, nullptr);
  CHECK(st.total() == doctest::Approx(2.0));
  CHECK(st.sample(0.75) == 1);
}
