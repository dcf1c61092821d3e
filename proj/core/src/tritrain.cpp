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

#include "tritrain/tritrain.hpp"

#include <future>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "tritrain/error.hpp"

namespace tritrain {

namespace {

constexpr double kMinImprovement = 1e-6;

std::array<std::size_t, 2> others(std::size_t learner) {
  switch (learner) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    case 2: return {0, 1};
    default: throw ConfigError("learner index must be 0, 1 or 2");
  }
}

std::array<std::vector<int>, 3> predict_triple(const ModelTriple& models, const EmbeddingSource& src,
                                               const Dataset& d) {
  std::array<std::vector<int>, 3> out;
  for (std::size_t m = 0; m < 3; ++m) {
    out[m].reserve(d.size());
    for (const Sentence& s : d.sentences) out[m].push_back(predict(models[m], src, s).label);
  }
  return out;
}

std::size_t pseudo_count(const Dataset& d) {
  std::size_t n = 0;
  for (const Sentence& s : d.sentences) n += s.source == Provenance::pseudo;
  return n;
}

}  // namespace

Dataset bootstrap_sample(const Dataset& labelled, Rng& rng) {
  if (labelled.empty()) throw DataError("bootstrap_sample: labelled set is empty");
  Dataset out;
  out.name = labelled.name + "#bootstrap";
  out.sentences.reserve(labelled.size());
  std::unordered_map<std::size_t, std::size_t> draws;
  for (std::size_t k = 0; k < labelled.size(); ++k) {
    const std::size_t pick = rng.below(labelled.size());
    Sentence s = labelled.sentences[pick];
    if (!s.label) throw DataError("bootstrap_sample: sentence '" + s.id + "' has no label");
    const std::size_t seen = draws[pick]++;
    if (s.origin.empty()) s.origin = s.id;
    if (seen > 0) s.id += "#bs" + std::to_string(seen);
    out.sentences.push_back(std::move(s));
  }
  return out;
}

Dataset agreement_label(const std::array<std::vector<int>, 3>& predictions, const Dataset& unlabelled,
                        std::size_t learner, const Dataset& labelled) {
  const auto [p, q] = others(learner);
  for (const auto& preds : predictions) {
    if (preds.size() != unlabelled.size()) throw DataError("agreement_label: prediction count mismatch");
  }
  Dataset out = labelled;
  out.name = labelled.name + "+pseudo" + std::to_string(learner + 1);
  for (std::size_t j = 0; j < unlabelled.size(); ++j) {
    if (predictions[p][j] != predictions[q][j]) continue;
    Sentence s = unlabelled.sentences[j];
    s.label = predictions[p][j];
    s.source = Provenance::pseudo;
    if (s.origin.empty()) s.origin = s.id;
    out.sentences.push_back(std::move(s));
  }
  return out;
}

Dataset agreement_label(const ModelTriple& models, const EmbeddingSource& src, const Dataset& unlabelled,
                        std::size_t learner, const Dataset& labelled) {
  const auto [p, q] = others(learner);
  std::array<std::vector<int>, 3> predictions;
  for (std::size_t m : {p, q}) {
    for (const Sentence& s : unlabelled.sentences) predictions[m].push_back(predict(models[m], src, s).label);
  }
  predictions[learner].assign(unlabelled.size(), 0);
  return agreement_label(predictions, unlabelled, learner, labelled);
}

std::vector<Prediction> majority_predictions(const ModelTriple& models, const EmbeddingSource& src,
                                             const Dataset& d) {
  std::vector<Prediction> out;
  out.reserve(d.size());
  for (const Sentence& s : d.sentences) {
    const Tensor x = src.embed(s);
    std::array<std::vector<double>, 3> probs;
    int votes = 0;
    for (std::size_t m = 0; m < 3; ++m) {
      const std::vector<double> z = logits(models[m], x);
      probs[m] = softmax(z);
      votes += predict_from_logits(z).label;
    }
    Prediction p;
    p.label = votes >= 2 ? 1 : 0;
    double acc = 0.0;
    for (const auto& pr : probs) acc += pr[static_cast<std::size_t>(p.label)];
    p.prob = acc / 3.0;
    out.push_back(p);
  }
  return out;
}

LabelMap majority_vote(const ModelTriple& models, const EmbeddingSource& src, const Dataset& d) {
  LabelMap out;
  for (const Sentence& s : d.sentences) {
    int votes = 0;
    for (const ModelParams& m : models) votes += predict(m, src, s).label;
    out[s.id] = votes >= 2 ? 1 : 0;
  }
  return out;
}

std::string to_jsonl(const IterationLog& log) {
  nlohmann::ordered_json j;
  j["iter"] = log.iter;
  j["l_sizes"] = log.l_sizes;
  j["pseudo_added"] = log.pseudo_added;
  j["val_f1"] = log.val_f1;
  return j.dump();
}

TriTrainResult tri_train(const ArchConfig& arch, const EmbeddingSource& src, const Dataset& labelled,
                         const Dataset& unlabelled, const Dataset& val, const TrainConfig& cfg,
                         const TriTrainOptions& options) {
  cfg.validate();
  if (options.max_iters == 0) throw ConfigError("tri_train: max_iters must be at least 1");
  if (labelled.empty()) throw DataError("tri_train: labelled set is empty");
  for (const Sentence& s : labelled.sentences) {
    if (!s.label) throw DataError("tri_train: labelled sentence '" + s.id + "' has no label");
  }
  {
    std::unordered_set<std::string> ids;
    for (const Sentence& s : labelled.sentences) ids.insert(s.id);
    for (const Sentence& s : unlabelled.sentences) {
      if (ids.count(s.id)) throw DataError("tri_train: id '" + s.id + "' occurs in both labelled and unlabelled data");
    }
  }

  SubsetTriple subsets;
  for (std::size_t m = 0; m < 3; ++m) {
    Rng rng(derive_seed(cfg.seed, {kBootstrapStream, m}));
    subsets[m] = bootstrap_sample(labelled, rng);
  }

  TriTrainResult result;
  double best = -1.0;
  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    ModelTriple models;
    auto train_one = [&](std::size_t m) {
      TrainConfig c = cfg;
      c.seed = derive_seed(cfg.seed, {kLearnerStream, iter, m});
      return train_supervised(arch, src, subsets[m], val, c).model;
    };
    if (options.jobs > 1) {
      std::array<std::future<ModelParams>, 3> pending;
      for (std::size_t m = 0; m < 3; ++m) pending[m] = std::async(std::launch::async, train_one, m);
      for (std::size_t m = 0; m < 3; ++m) models[m] = pending[m].get();
    } else {
      for (std::size_t m = 0; m < 3; ++m) models[m] = train_one(m);
    }

    IterationLog log;
    log.iter = iter;
    log.val_f1 = score(majority_vote(models, src, val), val).f1;
    for (std::size_t m = 0; m < 3; ++m) log.learner_val_f1[m] = evaluate(models[m], src, val).f1;

    const auto predictions = predict_triple(models, src, unlabelled);
    SubsetTriple rebuilt;
    for (std::size_t m = 0; m < 3; ++m) {
      rebuilt[m] = agreement_label(predictions, unlabelled, m, labelled);
      log.l_sizes[m] = rebuilt[m].size();
      log.pseudo_added[m] = pseudo_count(rebuilt[m]);
    }
    result.log.push_back(log);
    if (options.observer) options.observer(RoundView{iter, subsets, rebuilt, models, log});

    const bool improved = log.val_f1 > best + kMinImprovement;
    if (improved) {
      best = log.val_f1;
      result.models = models;
      result.pseudo_labelled = rebuilt;
      result.best_iteration = iter;
      result.best_val_f1 = log.val_f1;
    }
    const bool fixed_point = rebuilt == subsets;
    subsets = std::move(rebuilt);
    if (!improved || fixed_point) break;
  }
  return result;
}

}  // namespace tritrain
