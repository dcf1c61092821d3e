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

// Classic tri-training.
//
// Three learners start from bootstrap samples of the labelled set L. Each
// round trains all three from scratch, then rebuilds every training set as
// L plus the unlabelled sentences on which the *other* two learners agree,
// labelled with that agreed label. Rounds continue while the majority vote
// of the three improves validation F1.
//
// Learner indices are 0-based throughout this header.

#ifndef TRITRAIN_TRITRAIN_HPP_
#define TRITRAIN_TRITRAIN_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tritrain/embeddings.hpp"
#include "tritrain/metrics.hpp"
#include "tritrain/models.hpp"
#include "tritrain/text_prep.hpp"
#include "tritrain/training.hpp"

namespace tritrain {

using ModelTriple = std::array<ModelParams, 3>;
using SubsetTriple = std::array<Dataset, 3>;

/// |L| draws with replacement. The first draw of a sentence keeps its id;
/// repeats get `<id>#bs<k>`. Throws DataError on an empty or unlabelled L.
Dataset bootstrap_sample(const Dataset& labelled, Rng& rng);

/// L followed by every u in U on which the two learners other than `learner`
/// agree, labelled with the agreed label and marked pseudo.
Dataset agreement_label(const ModelTriple& models, const EmbeddingSource& src, const Dataset& unlabelled,
                        std::size_t learner, const Dataset& labelled);

/// Same rule from precomputed predictions (predictions[m][j] is learner m's
/// label for unlabelled sentence j).
Dataset agreement_label(const std::array<std::vector<int>, 3>& predictions, const Dataset& unlabelled,
                        std::size_t learner, const Dataset& labelled);

/// Label chosen by at least two of the three learners, per sentence id.
LabelMap majority_vote(const ModelTriple& models, const EmbeddingSource& src, const Dataset& d);

/// Majority labels in dataset order; prob is the mean probability the three
/// learners assign to the winning label.
std::vector<Prediction> majority_predictions(const ModelTriple& models, const EmbeddingSource& src,
                                             const Dataset& d);

struct IterationLog {
  std::size_t iter = 0;  // 1-based
  std::array<std::size_t, 3> l_sizes{};       // sizes of the rebuilt training sets
  std::array<std::size_t, 3> pseudo_added{};  // pseudo-labelled members of each
  double val_f1 = 0.0;                        // majority vote on validation
  std::array<double, 3> learner_val_f1{};
};

/// `{"iter":k,"l_sizes":[...],"pseudo_added":[...],"val_f1":...}`
std::string to_jsonl(const IterationLog& log);

/// Snapshot handed to the observer after each round.
struct RoundView {
  std::size_t iter;
  const SubsetTriple& trained_on;
  const SubsetTriple& rebuilt;
  const ModelTriple& models;
  const IterationLog& log;
};

struct TriTrainOptions {
  std::size_t max_iters = 10;
  /// Learners trained concurrently within a round (1 = sequential). Results
  /// do not depend on this value.
  std::size_t jobs = 1;
  std::function<void(const RoundView&)> observer;
};

struct TriTrainResult {
  ModelTriple models;           // learners of the best round
  SubsetTriple pseudo_labelled; // sets rebuilt by the best round's learners
  std::vector<IterationLog> log;
  std::size_t best_iteration = 0;
  double best_val_f1 = 0.0;
};

/// Runs tri-training with cfg.seed as the master seed. Learner m of round k
/// trains with seed derive_seed(cfg.seed, {kLearnerStream, k, m}). Stops when
/// the majority-vote F1 fails to beat the best so far by more than 1e-6, when
/// a round leaves all three training sets unchanged, or after max_iters.
TriTrainResult tri_train(const ArchConfig& arch, const EmbeddingSource& src, const Dataset& labelled,
                         const Dataset& unlabelled, const Dataset& val, const TrainConfig& cfg,
                         const TriTrainOptions& options = {});

inline constexpr std::uint64_t kBootstrapStream = 0x6273;
inline constexpr std::uint64_t kLearnerStream = 0x6c72;

}  // namespace tritrain

#endif  // TRITRAIN_TRITRAIN_HPP_
