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

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "tritrain/error.hpp"
#include "tritrain/tritrain.hpp"

using namespace tritrain;

namespace {

// A DAN whose output ignores the input: zero weights, biases favouring `label`.
ModelParams constant_model(int label, std::size_t dim) {
  Rng rng(0);
  ModelParams m = init_params(DanConfig{dim, {2}}, rng);
  for (Parameter& p : m.parameters) p.value.fill(0.0);
  for (Parameter& p : m.parameters) {
    if (p.name == "dan.ff0.bias") p.value[static_cast<std::size_t>(label)] = 1.0;
  }
  return m;
}

// A DAN predicting 1 exactly when the first embedding coordinate is positive.
ModelParams sign_model(std::size_t dim, double direction = 1.0) {
  Rng rng(0);
  ModelParams m = init_params(DanConfig{dim, {2}}, rng);
  for (Parameter& p : m.parameters) p.value.fill(0.0);
  for (Parameter& p : m.parameters) {
    if (p.name == "dan.ff0.weight") p.value.at(0, 1) = direction;
  }
  return m;
}

struct Problem {
  std::shared_ptr<EmbeddingTable> table;
  Dataset unlabelled;
};

Problem signed_problem(std::size_t n) {
  Problem p;
  p.table = std::make_shared<EmbeddingTable>(2);
  p.unlabelled.name = "u";
  Rng rng(5);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tok = "t" + std::to_string(i);
    p.table->add(tok, std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Sentence s;
    s.id = "u" + std::to_string(i);
    s.tokens = {tok};
    p.unlabelled.sentences.push_back(s);
  }
  return p;
}

std::multiset<std::string> gold_ids(const Dataset& d) {
  std::multiset<std::string> out;
  for (const Sentence& s : d.sentences) {
    if (s.source == Provenance::gold) out.insert(s.id);
  }
  return out;
}

}  // namespace

TEST_CASE("bootstrap sample size and ids") {
  Rng rng(1);
  const Dataset L = testing::make_labelled({1, 0, 1, 0, 0, 1, 1});
  const Dataset b = bootstrap_sample(L, rng);
  CHECK(b.size() == L.size());
  std::set<std::string> ids;
  for (const Sentence& s : b.sentences) {
    CHECK(ids.insert(s.id).second);
    const auto it = std::find_if(L.sentences.begin(), L.sentences.end(),
                                 [&](const Sentence& x) { return x.id == s.embedding_key(); });
    REQUIRE(it != L.sentences.end());
    CHECK(it->tokens == s.tokens);
    CHECK(it->label == s.label);
  }

  const Dataset one = testing::make_labelled({1});
  const Dataset b1 = bootstrap_sample(one, rng);
  REQUIRE(b1.size() == 1);
  CHECK(b1.sentences[0].id == "s0");

  CHECK_THROWS_AS(bootstrap_sample(Dataset{}, rng), DataError);
}

TEST_CASE("bootstrap keeps about 1 - 1/e distinct sentences") {
  const Dataset L = testing::make_labelled(std::vector<int>(1000, 1), 1);
  double total = 0.0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    std::set<std::string> distinct;
    for (const Sentence& s : bootstrap_sample(L, rng).sentences) distinct.insert(s.embedding_key());
    total += static_cast<double>(distinct.size()) / 1000.0;
  }
  CHECK(std::abs(total / seeds - (1.0 - std::exp(-1.0))) < 0.02);
}

TEST_CASE("agreement labelling") {
  const Problem p = signed_problem(30);
  const EmbeddingSource src = EmbeddingSource::from_table(p.table);
  const Dataset L = testing::make_labelled({1, 0});

  // Learners 1 and 2 agree everywhere, so every sentence joins l_0 with their label.
  const ModelTriple same = {constant_model(0, 2), sign_model(2), sign_model(2)};
  const Dataset l0 = agreement_label(same, src, p.unlabelled, 0, L);
  REQUIRE(l0.size() == L.size() + p.unlabelled.size());
  CHECK(std::equal(L.sentences.begin(), L.sentences.end(), l0.sentences.begin()));
  for (std::size_t j = 0; j < p.unlabelled.size(); ++j) {
    const Sentence& s = l0.sentences[L.size() + j];
    CHECK(s.id == p.unlabelled.sentences[j].id);
    CHECK(s.source == Provenance::pseudo);
    CHECK(s.label == predict(same[1], src, p.unlabelled.sentences[j]).label);
  }

  // Opposite learners never agree.
  const ModelTriple opposite = {sign_model(2), sign_model(2, 1.0), sign_model(2, -1.0)};
  CHECK(agreement_label(opposite, src, p.unlabelled, 0, L) == [&] {
    Dataset expect = L;
    expect.name = L.name + "+pseudo1";
    return expect;
  }());
  CHECK_THROWS_AS(agreement_label(opposite, src, p.unlabelled, 3, L), ConfigError);
}

TEST_CASE("pigeonhole: every unlabelled sentence joins some set") {
  Rng rng(9);
  const Dataset U = testing::make_labelled(std::vector<int>(50, 0), 4, "u");
  const Dataset L = testing::make_labelled({1, 0, 1});
  for (int trial = 0; trial < 200; ++trial) {
    std::array<std::vector<int>, 3> preds;
    for (auto& p : preds) {
      for (std::size_t j = 0; j < U.size(); ++j) p.push_back(static_cast<int>(rng.below(2)));
    }
    std::map<std::string, int> joined;
    std::size_t pseudo_total = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const Dataset li = agreement_label(preds, U, i, L);
      CHECK(li.size() >= L.size());
      CHECK(li.size() <= L.size() + U.size());
      for (const Sentence& s : li.sentences) {
        if (s.source == Provenance::pseudo) {
          ++joined[s.id];
          ++pseudo_total;
        }
      }
    }
    CHECK(joined.size() == U.size());
    CHECK(pseudo_total >= U.size());
  }
}

TEST_CASE("majority vote") {
  const Problem p = signed_problem(20);
  const EmbeddingSource src = EmbeddingSource::from_table(p.table);
  const ModelParams one = constant_model(1, 2), zero = constant_model(0, 2);
  for (const auto& [id, label] : majority_vote({one, one, zero}, src, p.unlabelled)) CHECK(label == 1);
  for (const auto& [id, label] : majority_vote({zero, zero, zero}, src, p.unlabelled)) CHECK(label == 0);

  const ModelParams s = sign_model(2);
  const LabelMap vote = majority_vote({s, s, s}, src, p.unlabelled);
  CHECK(vote == predict_labels(s, src, p.unlabelled));

  const auto preds = majority_predictions({s, one, zero}, src, p.unlabelled);
  for (std::size_t j = 0; j < preds.size(); ++j) {
    CHECK(preds[j].label == vote.at(p.unlabelled.sentences[j].id));
    CHECK(preds[j].prob > 0.0);
    CHECK(preds[j].prob < 1.0);
  }
}

namespace {

struct Small {
  testing::DomainShift f;
  EmbeddingSource src;
  TrainConfig cfg;
};

Small small_problem(std::uint64_t seed) {
  testing::DomainShift f =
      testing::make_domain_shift(seed, {.dim = 10, .n_source = 40, .n_unlabelled = 30, .n_val = 30, .n_test = 10});
  EmbeddingSource src = f.embedding_source();
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = 3;
  cfg.patience = 1;
  return {std::move(f), std::move(src), cfg};
}

}  // namespace

TEST_CASE("tri_train invariants hold every round") {
  Small p = small_problem(21);
  const DanConfig arch = DanConfig::for_input(10);
  std::size_t rounds = 0;
  std::vector<double> logged;
  TriTrainOptions options;
  options.max_iters = 4;
  options.observer = [&](const RoundView& view) {
    ++rounds;
    logged.push_back(view.log.val_f1);
    std::map<std::string, int> joined;
    std::size_t pseudo_total = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      const Dataset& li = view.rebuilt[i];
      CHECK(gold_ids(li) == gold_ids(p.f.source));
      CHECK(li.size() >= p.f.source.size());
      CHECK(li.size() <= p.f.source.size() + p.f.unlabelled.size());
      CHECK(view.log.l_sizes[i] == li.size());
      CHECK(view.log.pseudo_added[i] == li.size() - p.f.source.size());
      for (const Sentence& s : li.sentences) {
        if (s.source != Provenance::pseudo) continue;
        CHECK(s.label.has_value());
        ++joined[s.id];
        ++pseudo_total;
      }
    }
    CHECK(joined.size() == p.f.unlabelled.size());
    CHECK(pseudo_total >= p.f.unlabelled.size());
    if (view.iter == 1) {
      for (const Dataset& li : view.trained_on) CHECK(li.size() == p.f.source.size());
    }
  };
  const TriTrainResult r = tri_train(arch, p.src, p.f.source, p.f.unlabelled, p.f.val, p.cfg, options);
  CHECK(rounds == r.log.size());
  REQUIRE(!r.log.empty());
  CHECK(r.log.size() <= 4);

  const double best = *std::max_element(logged.begin(), logged.end());
  CHECK(r.best_val_f1 == best);
  CHECK(r.log[r.best_iteration - 1].val_f1 == best);
  CHECK(score(majority_vote(r.models, p.src, p.f.val), p.f.val).f1 == best);
  // Rounds only continue while the vote improves.
  for (std::size_t k = 1; k + 1 < r.log.size(); ++k) CHECK(r.log[k].val_f1 > r.log[k - 1].val_f1);
}

TEST_CASE("empty unlabelled set stops at the second round") {
  Small p = small_problem(22);
  Dataset empty;
  empty.name = "empty";
  const TriTrainResult r = tri_train(DanConfig::for_input(10), p.src, p.f.source, empty, p.f.val, p.cfg);
  REQUIRE(r.log.size() == 2);
  for (const IterationLog& log : r.log) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(log.l_sizes[i] == p.f.source.size());
      CHECK(log.pseudo_added[i] == 0);
    }
  }
}

TEST_CASE("tri_train is deterministic and independent of jobs") {
  Small p = small_problem(23);
  const DanConfig arch = DanConfig::for_input(10);
  TriTrainOptions seq;
  seq.max_iters = 3;
  TriTrainOptions par = seq;
  par.jobs = 3;
  const TriTrainResult a = tri_train(arch, p.src, p.f.source, p.f.unlabelled, p.f.val, p.cfg, seq);
  const TriTrainResult b = tri_train(arch, p.src, p.f.source, p.f.unlabelled, p.f.val, p.cfg, seq);
  const TriTrainResult c = tri_train(arch, p.src, p.f.source, p.f.unlabelled, p.f.val, p.cfg, par);
  REQUIRE(a.log.size() == b.log.size());
  REQUIRE(a.log.size() == c.log.size());
  for (std::size_t k = 0; k < a.log.size(); ++k) {
    CHECK(to_jsonl(a.log[k]) == to_jsonl(b.log[k]));
    CHECK(to_jsonl(a.log[k]) == to_jsonl(c.log[k]));
  }
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < a.models[m].parameters.size(); ++i) {
      CHECK(a.models[m].parameters[i].value == c.models[m].parameters[i].value);
    }
  }
}

TEST_CASE("tri_train input errors") {
  Small p = small_problem(24);
  const DanConfig arch = DanConfig::for_input(10);
  Dataset overlap = p.f.unlabelled;
  overlap.sentences[0].id = p.f.source.sentences[0].id;
  CHECK_THROWS_AS(tri_train(arch, p.src, p.f.source, overlap, p.f.val, p.cfg), DataError);
  CHECK_THROWS_AS(tri_train(arch, p.src, Dataset{}, p.f.unlabelled, p.f.val, p.cfg), DataError);
  TriTrainOptions zero;
  zero.max_iters = 0;
  CHECK_THROWS_AS(tri_train(arch, p.src, p.f.source, p.f.unlabelled, p.f.val, p.cfg, zero), ConfigError);
}

TEST_CASE("iteration log line") {
  IterationLog log;
  log.iter = 2;
  log.l_sizes = {10, 11, 12};
  log.pseudo_added = {0, 1, 2};
  log.val_f1 = 0.5;
  const auto j = nlohmann::ordered_json::parse(to_jsonl(log));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"iter", "l_sizes", "pseudo_added", "val_f1"});
  CHECK(j["l_sizes"] == nlohmann::json::array({10, 11, 12}));
}
