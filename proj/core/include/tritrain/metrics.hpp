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

#ifndef TRITRAIN_METRICS_HPP_
#define TRITRAIN_METRICS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "tritrain/text_prep.hpp"

namespace tritrain {

/// Positive-class (label 1) precision, recall and F1. A zero denominator
/// yields 0.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
Metrics score(std::span<const int> gold, std::span<const int> predicted);

/// Labels keyed by sentence id.
using LabelMap = std::map<std::string, int>;

/// Scores predictions against a labelled dataset. Throws DataError if a gold
/// sentence has no prediction.
Metrics score(const LabelMap& predicted, const Dataset& gold);

}  // namespace tritrain

#endif  // TRITRAIN_METRICS_HPP_
