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

#include "tritrain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "tritrain/error.hpp"

namespace tritrain {

LabelMap seed_majority(std::span<const LabelMap> sets) {
  if (sets.empty() || sets.size() % 2 == 0) {
    throw ConfigError("seed_majority needs an odd number of prediction sets, got " + std::to_string(sets.size()));
  }
  const LabelMap& first = sets.front();
  for (const LabelMap& s : sets) {
    if (s.size() != first.size() ||
        !std::equal(s.begin(), s.end(), first.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw DataError("seed_majority: prediction sets cover different ids");
    }
  }
  LabelMap out;
  std::vector<LabelMap::const_iterator> cursors;
  for (const LabelMap& s : sets) cursors.push_back(s.begin());
  for (const auto& [id, unused] : first) {
    std::size_t ones = 0;
    for (auto& it : cursors) {
      ones += it->second == 1;
      ++it;
    }
    out.emplace(id, 2 * ones > sets.size() ? 1 : 0);
  }
  return out;
}

double mcnemar_exact_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k_max = std::min(b, c);
  // Terms C(n,k) 2^-n in log space so large n does not underflow the first terms.
  const double log_half_n = -static_cast<double>(n) * std::numbers::ln2;
  double log_term = log_half_n;  // k = 0
  double tail = std::exp(log_term);
  for (std::size_t k = 0; k < k_max; ++k) {
    log_term += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1));
    tail += std::exp(log_term);
  }
  return std::min(1.0, 2.0 * tail);
}

McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c) {
  McNemarResult r;
  r.b = b;
  r.c = c;
  const std::size_t n = b + c;
  if (n == 0) return r;
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  r.statistic = diff * diff / static_cast<double>(n);
  r.p_exact = mcnemar_exact_p(b, c);
  r.p_chi2 = std::erfc(std::sqrt(r.statistic / 2.0));
  return r;
}

McNemarResult mcnemar(const LabelMap& preds_a, const LabelMap& preds_b, const Dataset& gold) {
  if (preds_a.size() != gold.size() || preds_b.size() != gold.size()) {
    throw DataError("mcnemar: prediction files must cover exactly the " + std::to_string(gold.size()) +
                    " gold sentences (got " + std::to_string(preds_a.size()) + " and " +
                    std::to_string(preds_b.size()) + ")");
  }
  std::size_t b = 0, c = 0;
  for (const Sentence& s : gold.sentences) {
    if (!s.label) throw DataError("mcnemar: gold sentence '" + s.id + "' has no label");
    const auto ia = preds_a.find(s.id);
    const auto ib = preds_b.find(s.id);
    if (ia == preds_a.end() || ib == preds_b.end()) {
      throw DataError("mcnemar: no prediction for gold sentence '" + s.id + "'");
    }
    const bool a_right = ia->second == *s.label;
    const bool b_right = ib->second == *s.label;
    if (a_right && !b_right) ++b;
    if (!a_right && b_right) ++c;
  }
  return mcnemar_from_counts(b, c);
}

std::string to_json(const McNemarResult& r) {
  nlohmann::ordered_json j;
  j["b"] = r.b;
  j["c"] = r.c;
  j["statistic"] = r.statistic;
  j["p_exact"] = r.p_exact;
  j["p_chi2"] = r.p_chi2;
  return j.dump();
}

std::string format_table(const McNemarResult& r, const std::string& name_a, const std::string& name_b) {
  std::ostringstream out;
  out << "McNemar test: " << name_a << " vs " << name_b << '\n';
  out << "  A right, B wrong (b)   " << r.b << '\n';
  out << "  A wrong, B right (c)   " << r.c << '\n';
  out << std::setprecision(6);
  out << "  chi-square (corrected) " << r.statistic << '\n';
  out << "  p (exact binomial)     " << r.p_exact << '\n';
  out << "  p (chi-square, 1 dof)  " << r.p_chi2 << '\n';
  return out.str();
}

double student_t_quantile(double probability, double df) {
  if (!(df > 0.0) || !(probability > 0.0 && probability < 1.0)) {
    throw ConfigError("student_t_quantile: need df > 0 and 0 < p < 1");
  }
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), probability);
}

MeanInterval mean_confidence_interval(std::span<const double> values, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  MeanInterval out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  const double t = student_t_quantile(0.5 + confidence / 2.0, n - 1.0);
  out.half_width = t * sd / std::sqrt(n);
  return out;
}

}  // namespace tritrain
