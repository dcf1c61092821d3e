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

#include "tritrain/metrics.hpp"

#include "tritrain/error.hpp"

namespace tritrain {

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Metrics score(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("score: " + std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(predicted.size()) + " predictions");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == 1;
    const bool p = predicted[i] == 1;
    if (g && p) ++tp;
    else if (!g && p) ++fp;
    else if (g && !p) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

Metrics score(const LabelMap& predicted, const Dataset& gold) {
  std::vector<int> g, p;
  g.reserve(gold.size());
  p.reserve(gold.size());
  for (const Sentence& s : gold.sentences) {
    if (!s.label) throw DataError("score: gold sentence '" + s.id + "' has no label");
    auto it = predicted.find(s.id);
    if (it == predicted.end()) throw DataError("score: no prediction for sentence '" + s.id + "'");
    g.push_back(*s.label);
    p.push_back(it->second);
  }
  return score(g, p);
}

}  // namespace tritrain
