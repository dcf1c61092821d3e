// Copyright 2026 The tritrain Authors.
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

#include "doctest.h"
#include "fixtures.hpp"
#include "tritrain/error.hpp"
#include "tritrain/metrics.hpp"

using namespace tritrain;
using doctest::Approx;

TEST_CASE("all correct") {
  const std::vector<int> gold = {1, 0, 1, 0};
  const Metrics m = score(gold, gold);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("counts formula") {
  const Metrics m = metrics_from_counts(2, 1, 1, 5);
  CHECK(m.precision == Approx(2.0 / 3.0));
  CHECK(m.recall == Approx(2.0 / 3.0));
  CHECK(m.f1 == Approx(2.0 / 3.0));
  CHECK(m.total() == 9);
}

TEST_CASE("zero division gives zero") {
  const std::vector<int> gold = {1, 1, 0};
  const std::vector<int> none = {0, 0, 0};
  const Metrics m = score(gold, none);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(metrics_from_counts(0, 0, 0, 4).f1 == 0.0);
}

TEST_CASE("f1 is the harmonic mean and counts cover every item") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<int> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng.below(2));
      pred[i] = static_cast<int>(rng.below(2));
    }
    const Metrics m = score(gold, pred);
    CHECK(m.total() == n);
    if (m.precision + m.recall > 0) {
      CHECK(m.f1 == Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    } else {
      CHECK(m.f1 == 0.0);
    }
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) tp += gold[i] == 1 && pred[i] == 1;
    CHECK(m.tp == tp);
  }
}

TEST_CASE("score against a dataset") {
  const Dataset d = testing::make_labelled({1, 0, 1});
  const LabelMap preds = {{"s0", 1}, {"s1", 1}, {"s2", 0}};
  const Metrics m = score(preds, d);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 0);
  CHECK_THROWS_AS(score(LabelMap{{"s0", 1}}, d), DataError);
  const std::vector<int> a = {1}, b = {1, 0};
  CHECK_THROWS_AS(score(a, b), Error);
}
