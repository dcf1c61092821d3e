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

// Synthetic datasets and scratch directories shared by the test suites.

#ifndef TRITRAIN_TESTS_FIXTURES_HPP_
#define TRITRAIN_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tritrain/embeddings.hpp"
#include "tritrain/rng.hpp"
#include "tritrain/tensor.hpp"
#include "tritrain/text_prep.hpp"

namespace tritrain::testing {

/// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// (rows x cols) matrix of standard normal draws.
Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Two domains sharing one 40-d static embedding table.
///
/// Every sentence mixes neutral words with class-cue words. Source cues come
/// from a shared vocabulary and a source-only vocabulary; target cues come
/// mostly from a target-only vocabulary that never occurs in source
/// sentences, and target neutral words sit around a common mean offset. A
/// source-trained model therefore sees only the weak shared cue on target
/// data, while pseudo-labels on target sentences expose the target cues.
struct DomainShift {
  std::shared_ptr<EmbeddingTable> table;
  Dataset source;       // labelled source sentences
  Dataset unlabelled;   // target sentences, labels stripped
  Dataset unlabelled_gold;  // the same sentences with their labels
  Dataset val;          // labelled target sentences for model selection
  Dataset test;         // labelled held-out target sentences

  EmbeddingSource embedding_source() const;
};

struct DomainShiftOptions {
  std::size_t dim = 40;
  std::size_t n_source = 300;
  std::size_t n_unlabelled = 300;
  std::size_t n_val = 100;
  std::size_t n_test = 200;
  double source_positive_rate = 0.35;
  double target_positive_rate = 0.4;
  double cue_rate = 0.35;           // fraction of tokens that are class cues
  double cue_noise = 0.1;           // chance a cue comes from the other class
  double target_shared_share = 0.25;  // share of target cues taken from the shared vocabulary
  double cue_strength = 1.0;
  double word_noise = 0.35;
  double domain_shift = 1.5;        // norm of the target neutral-word offset
};

DomainShift make_domain_shift(std::uint64_t seed, const DomainShiftOptions& options = {});

/// Writes every token of `datasets` that the table knows, one
/// "token v1 .. vd" line each in sorted order, at full double precision.
void write_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table,
                           const std::vector<const Dataset*>& datasets);

/// Files written by write_domain_shift: source.csv, unlabelled.csv, val.csv,
/// test.csv, unlabelled_gold.csv and embeddings.txt under `dir`.
void write_domain_shift(const std::filesystem::path& dir, const DomainShift& fixture);

/// Small separable problem: half the sentences use token "pos", half "neg",
/// with orthogonal embeddings plus shared filler tokens.
struct Separable {
  std::shared_ptr<EmbeddingTable> table;
  Dataset train;
  Dataset val;
};
Separable make_separable(std::size_t dim = 4);

/// Dataset of n sentences with ids s0..s{n-1} and the given labels; tokens
/// are "w<i>" repeated `length` times.
Dataset make_labelled(const std::vector<int>& labels, std::size_t length = 5, const std::string& prefix = "s");

}  // namespace tritrain::testing

#endif  // TRITRAIN_TESTS_FIXTURES_HPP_
