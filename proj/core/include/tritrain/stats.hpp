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

// Paired significance testing between two classifiers and cross-seed
// aggregation.

#ifndef TRITRAIN_STATS_HPP_
#define TRITRAIN_STATS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tritrain/metrics.hpp"
#include "tritrain/text_prep.hpp"

namespace tritrain {

/// Per id, the label chosen by more than half of the sets. The number of
/// sets must be odd and every set must cover the same ids.
LabelMap seed_majority(std::span<const LabelMap> prediction_sets);

struct McNemarResult {
  std::size_t b = 0;       // A correct, B wrong
  std::size_t c = 0;       // A wrong, B correct
  double statistic = 0.0;  // (|b - c| - 1)^2 / (b + c), 0 when b + c = 0
  double p_exact = 1.0;    // two-sided exact binomial, clipped to 1
  double p_chi2 = 1.0;     // continuity-corrected chi-square, 1 d.o.f.
};

/// Two-sided exact binomial p-value min(1, 2 * sum_{k<=min(b,c)} C(b+c,k) / 2^(b+c)).
double mcnemar_exact_p(std::size_t b, std::size_t c);

/// Result for given discordant counts.
McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c);

/// Counts discordant pairs over the gold sentences. Throws DataError when
/// either prediction map does not cover exactly the gold ids.
McNemarResult mcnemar(const LabelMap& preds_a, const LabelMap& preds_b, const Dataset& gold);

/// `{"b":..,"c":..,"statistic":..,"p_exact":..,"p_chi2":..}`
std::string to_json(const McNemarResult& r);
std::string format_table(const McNemarResult& r, const std::string& name_a, const std::string& name_b);

/// Mean and half-width of a two-sided Student-t confidence interval. The
/// half-width is absent for fewer than two values.
struct MeanInterval {
  double mean = 0.0;
  std::optional<double> half_width;
  std::size_t n = 0;
};

MeanInterval mean_confidence_interval(std::span<const double> values, double confidence = 0.95);

/// Quantile of Student's t distribution with df degrees of freedom.
double student_t_quantile(double probability, double df);

}  // namespace tritrain

#endif  // TRITRAIN_STATS_HPP_
