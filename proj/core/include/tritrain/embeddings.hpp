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

#ifndef TRITRAIN_EMBEDDINGS_HPP_
#define TRITRAIN_EMBEDDINGS_HPP_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tritrain/tensor.hpp"
#include "tritrain/text_prep.hpp"

namespace tritrain {

/// Static token -> vector table. Tokens missing from the table map to
/// oov_vector (zeros after loading).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  /// Inserts or replaces a vector. Throws DataError on a width mismatch.
  void add(const std::string& token, std::span<const double> vector);
  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  /// Vector for token, or the OOV vector.
  std::span<const double> lookup(const std::string& token) const;
  std::span<const double> oov_vector() const { return oov_; }
  void set_oov_vector(std::span<const double> v);

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> storage_;
  std::vector<double> oov_;
};

/// Precomputed per-sentence contextual vectors keyed by sentence id.
class ContextualStore {
 public:
  ContextualStore() = default;
  explicit ContextualStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  /// Throws DataError when the width differs from dim (the first entry fixes
  /// dim for a default-constructed store).
  void add(const std::string& id, Tensor vectors);
  const Tensor* find(const std::string& id) const;
  /// Adds every entry of `other`. Throws DataError on an id present in both.
  void merge(const ContextualStore& other);

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, Tensor> entries_;
};

/// Word-vector text format: `token v1 ... vdim` per line. A leading
/// word2vec-style `count dim` header line is skipped.
EmbeddingTable parse_embedding_table(std::istream& in, std::size_t expected_dim);
EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::size_t expected_dim);

/// JSON Lines `{"id": ..., "vectors": [[...], ...]}`. An optional first line
/// without an "id" key but with a "dim" key is read as a header.
ContextualStore parse_contextual_store(std::istream& in);
ContextualStore load_precomputed_embeddings(const std::filesystem::path& path);

/// Ids whose store entry is missing or whose row count differs from the
/// sentence's token count.
std::vector<std::string> alignment_errors(const ContextualStore& store, const Dataset& d);

inline constexpr double kStaticEmbeddingDropout = 0.2;
inline constexpr double kContextualEmbeddingDropout = 0.5;

/// Either kind of embedding, shared immutably, plus the dropout rate the
/// models apply to its output in train mode.
class EmbeddingSource {
 public:
  static EmbeddingSource from_table(std::shared_ptr<const EmbeddingTable> table,
                                    double dropout_rate = kStaticEmbeddingDropout);
  static EmbeddingSource from_store(std::shared_ptr<const ContextualStore> store,
                                    double dropout_rate = kContextualEmbeddingDropout);

  std::size_t dim() const;
  double dropout_rate() const { return dropout_rate_; }
  bool is_contextual() const { return std::holds_alternative<std::shared_ptr<const ContextualStore>>(source_); }

  /// (token count x dim) matrix; row t embeds token t. No dropout here.
  /// Throws DataError when a contextual entry is missing or misaligned.
  Tensor embed(const Sentence& s) const;

 private:
  using Variant = std::variant<std::shared_ptr<const EmbeddingTable>, std::shared_ptr<const ContextualStore>>;
  EmbeddingSource(Variant source, double dropout_rate);

  Variant source_;
  double dropout_rate_;
};

inline Tensor embed_sentence(const EmbeddingSource& src, const Sentence& s) { return src.embed(s); }

}  // namespace tritrain

#endif  // TRITRAIN_EMBEDDINGS_HPP_
