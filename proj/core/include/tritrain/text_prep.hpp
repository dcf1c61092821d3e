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

#ifndef TRITRAIN_TEXT_PREP_HPP_
#define TRITRAIN_TEXT_PREP_HPP_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tritrain {

enum class Provenance { gold, pseudo };

std::string_view provenance_name(Provenance p);

/// One CSV row before preprocessing.
struct RawRecord {
  std::string id;
  std::string text;
  std::optional<int> label;
};

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<int> label;
  Provenance source = Provenance::gold;
  /// Id of the row this sentence was read from. Copies made by upsampling or
  /// bootstrap sampling get fresh ids but keep the origin, which is the key
  /// into per-sentence embedding stores.
  std::string origin;

  const std::string& embedding_key() const { return origin.empty() ? id : origin; }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Collapses whitespace, folds accented Latin letters to their base letters,
/// maps typographic quotes and dashes to ASCII, and drops every character
/// other than ASCII letters, digits, space and . , ! ? ' " - : ; ( ) /.
/// Case is preserved. Idempotent.
std::string clean_sentence(std::string_view raw);

/// Lowercases, splits on spaces, and peels leading and trailing punctuation
/// off each word as one-character tokens. Internal punctuation stays
/// ("don't", "e-mail", "3.5").
std::vector<std::string> tokenize(std::string_view clean);

/// Keeps sentences with at least min_tokens tokens, in order. Meant for
/// training data only; evaluation sets must be scored in full.
Dataset filter_short(const Dataset& d, std::size_t min_tokens = 4);

/// Throws DataError on the first repeated id.
void check_unique_ids(const Dataset& d);

/// Reads `id,sentence[,label][,source]` rows. With has_labels the label
/// column is required and every value must be 0 or 1; without it any label
/// column is ignored. Every sentence is cleaned and tokenized.
Dataset parse_dataset(std::istream& in, const std::string& name, bool has_labels);
Dataset load_dataset(const std::filesystem::path& path, bool has_labels);

/// True when the file's header names a label column.
bool has_label_column(const std::filesystem::path& path);

/// Writes `id,sentence[,label][,source]` with the sentence as its
/// space-joined tokens. Reloading the output yields the same tokens.
struct WriteOptions {
  bool labels = true;
  bool source_column = false;
};
void write_dataset(std::ostream& out, const Dataset& d, WriteOptions options = {});
void write_dataset(const std::filesystem::path& path, const Dataset& d, WriteOptions options = {});

std::size_t count_positive(const Dataset& d);

}  // namespace tritrain

#endif  // TRITRAIN_TEXT_PREP_HPP_
