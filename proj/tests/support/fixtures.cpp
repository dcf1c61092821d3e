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

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace tritrain::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("tritrain-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols});
  for (double& v : t.data()) v = rng.normal();
  return t;
}

EmbeddingSource DomainShift::embedding_source() const { return EmbeddingSource::from_table(table); }

namespace {

using Vec = std::vector<double>;

Vec gaussian(std::size_t dim, Rng& rng) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

// Gram-Schmidt against the earlier directions, then unit length.
Vec orthonormal(std::size_t dim, Rng& rng, const std::vector<Vec>& basis) {
  Vec v = gaussian(dim, rng);
  for (const Vec& b : basis) {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += v[i] * b[i];
    for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

struct Vocab {
  std::vector<std::string> words[2];  // indexed by class
};

constexpr std::size_t kCueWords = 20;
constexpr std::size_t kNeutralWords = 100;

}  // namespace

DomainShift make_domain_shift(std::uint64_t seed, const DomainShiftOptions& o) {
  Rng rng(derive_seed(seed, {0x6473}));
  const std::size_t dim = o.dim;
  std::vector<Vec> basis;
  for (int k = 0; k < 4; ++k) basis.push_back(orthonormal(dim, rng, basis));
  const Vec& shared_dir = basis[0];
  const Vec& source_dir = basis[1];
  const Vec& target_dir = basis[2];
  const Vec& shift_dir = basis[3];

  auto table = std::make_shared<EmbeddingTable>(dim);
  auto add_word = [&](const std::string& token, const Vec& centre, double scale) {
    Vec v = gaussian(dim, rng);
    for (std::size_t i = 0; i < dim; ++i) v[i] = centre[i] * scale + o.word_noise * v[i];
    table->add(token, v);
  };

  Vocab shared, source_only, target_only;
  auto make_cues = [&](Vocab& vocab, const std::string& stem, const Vec& dir) {
    for (int cls = 0; cls < 2; ++cls) {
      const double sign = cls == 1 ? 1.0 : -1.0;
      for (std::size_t k = 0; k < kCueWords; ++k) {
        const std::string token = stem + (cls ? "p" : "n") + std::to_string(k);
        add_word(token, dir, sign * o.cue_strength);
        vocab.words[cls].push_back(token);
      }
    }
  };
  make_cues(shared, "sh", shared_dir);
  make_cues(source_only, "sr", source_dir);
  make_cues(target_only, "tg", target_dir);

  std::vector<std::string> source_neutral, target_neutral;
  const Vec zero(dim, 0.0);
  for (std::size_t k = 0; k < kNeutralWords; ++k) {
    source_neutral.push_back("sx" + std::to_string(k));
    add_word(source_neutral.back(), zero, 0.0);
    target_neutral.push_back("tx" + std::to_string(k));
    add_word(target_neutral.back(), shift_dir, o.domain_shift);
  }

  auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
    return words[rng.below(words.size())];
  };

  auto sentence = [&](bool target, int label, const std::string& id) {
    Sentence s;
    s.id = id;
    s.label = label;
    const std::size_t len = 6 + rng.below(7);
    for (std::size_t t = 0; t < len; ++t) {
      if (rng.uniform() < o.cue_rate) {
        const int cls = rng.uniform() < o.cue_noise ? 1 - label : label;
        const double shared_share = target ? o.target_shared_share : 0.5;
        const Vocab& from = rng.uniform() < shared_share ? shared : (target ? target_only : source_only);
        s.tokens.push_back(pick(from.words[cls]));
      } else {
        s.tokens.push_back(pick(target ? target_neutral : source_neutral));
      }
    }
    return s;
  };

  auto make_set = [&](const std::string& name, std::size_t n, bool target, double positive_rate,
                      const std::string& prefix) {
    Dataset d;
    d.name = name;
    const auto positives = static_cast<std::size_t>(std::lround(positive_rate * static_cast<double>(n)));
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < positives; ++i) labels[i] = 1;
    for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) d.sentences.push_back(sentence(target, labels[i], prefix + std::to_string(i)));
    return d;
  };

  DomainShift out;
  out.table = table;
  out.source = make_set("source", o.n_source, false, o.source_positive_rate, "src");
  out.unlabelled_gold = make_set("unlabelled", o.n_unlabelled, true, o.target_positive_rate, "unl");
  out.unlabelled = out.unlabelled_gold;
  for (Sentence& s : out.unlabelled.sentences) s.label.reset();
  out.val = make_set("val", o.n_val, true, o.target_positive_rate, "val");
  out.test = make_set("test", o.n_test, true, o.target_positive_rate, "tst");
  return out;
}

void write_embedding_table(const fs::path& path, const EmbeddingTable& table,
                           const std::vector<const Dataset*>& datasets) {
  std::set<std::string> tokens;
  for (const Dataset* d : datasets) {
    for (const Sentence& s : d->sentences) tokens.insert(s.tokens.begin(), s.tokens.end());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[32];
  for (const std::string& t : tokens) {
    if (!table.contains(t)) continue;
    out << t;
    for (double v : table.lookup(t)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

void write_domain_shift(const fs::path& dir, const DomainShift& f) {
  fs::create_directories(dir);
  write_dataset(dir / "source.csv", f.source);
  write_dataset(dir / "unlabelled.csv", f.unlabelled, WriteOptions{false, false});
  write_dataset(dir / "unlabelled_gold.csv", f.unlabelled_gold);
  write_dataset(dir / "val.csv", f.val);
  write_dataset(dir / "test.csv", f.test);
  write_embedding_table(dir / "embeddings.txt", *f.table, {&f.source, &f.unlabelled, &f.val, &f.test});
}

Separable make_separable(std::size_t dim) {
  Separable out;
  out.table = std::make_shared<EmbeddingTable>(dim);
  Vec pos(dim, 0.0), neg(dim, 0.0), filler(dim, 0.0);
  pos[0] = 1.0;
  neg[1 % dim] = 1.0;
  filler[2 % dim] = 0.5;
  out.table->add("pos", pos);
  out.table->add("neg", neg);
  out.table->add("the", filler);
  auto build = [](const std::string& prefix, std::size_t n) {
    Dataset d;
    d.name = prefix;
    for (std::size_t i = 0; i < n; ++i) {
      Sentence s;
      s.id = prefix + std::to_string(i);
      const int label = i % 2 == 0 ? 1 : 0;
      s.label = label;
      s.tokens = {"the", label ? "pos" : "neg", "the", label ? "pos" : "neg"};
      d.sentences.push_back(std::move(s));
    }
    return d;
  };
  out.train = build("tr", 8);
  out.val = build("va", 8);
  return out;
}

Dataset make_labelled(const std::vector<int>& labels, std::size_t length, const std::string& prefix) {
  Dataset d;
  d.name = prefix;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Sentence s;
    s.id = prefix + std::to_string(i);
    s.label = labels[i];
    s.tokens.assign(length, "w" + std::to_string(i));
    d.sentences.push_back(std::move(s));
  }
  return d;
}

}  // namespace tritrain::testing
