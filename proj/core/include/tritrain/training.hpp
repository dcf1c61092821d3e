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

#ifndef TRITRAIN_TRAINING_HPP_
#define TRITRAIN_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tritrain/embeddings.hpp"
#include "tritrain/metrics.hpp"
#include "tritrain/models.hpp"
#include "tritrain/rng.hpp"
#include "tritrain/text_prep.hpp"

namespace tritrain {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  bool upsample = true;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Throws ConfigError unless lr > 0, max_epochs >= 1 and patience <= max_epochs.
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  Metrics val;
  double train_loss = 0.0;
};

/// `{"epoch":n,"val_precision":...,"val_recall":...,"val_f1":...}`
std::string to_jsonl(const EpochLog& log);

struct TrainResult {
  ModelParams model;
  Metrics val_metrics;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
};

/// Duplicates positives, drawn uniformly with replacement, until the classes
/// balance. Originals come first in their original order; copies carry ids
/// `<id>#up<k>`. Returned unchanged when positives already match or exceed
/// negatives. Throws DataError for unlabelled or single-class input.
Dataset upsample(const Dataset& d, Rng& rng);

/// Batch-size-one Adam training with per-epoch validation F1 model selection.
/// Stops after `patience` consecutive epochs without an F1 gain above 1e-6 or
/// at max_epochs, and returns the best epoch's parameters.
TrainResult train_supervised(const ArchConfig& arch, const EmbeddingSource& src, const Dataset& train,
                             const Dataset& val, const TrainConfig& cfg);

/// Eval-mode predictions for every sentence, in dataset order.
std::vector<Prediction> predict_all(const ModelParams& m, const EmbeddingSource& src, const Dataset& d);
LabelMap predict_labels(const ModelParams& m, const EmbeddingSource& src, const Dataset& d);

/// Positive-class metrics of m on a labelled dataset.
Metrics evaluate(const ModelParams& m, const EmbeddingSource& src, const Dataset& d);

}  // namespace tritrain

#endif  // TRITRAIN_TRAINING_HPP_
