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

#include "tritrain/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tritrain/error.hpp"

namespace tritrain {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim), oov_(dim, 0.0) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

void EmbeddingTable::add(const std::string& token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw DataError("embedding for token '" + token + "' has " + std::to_string(vector.size()) +
                    " values, expected " + std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(token, storage_.size() / dim_);
  if (inserted) {
    storage_.insert(storage_.end(), vector.begin(), vector.end());
  } else {
    std::copy(vector.begin(), vector.end(), storage_.begin() + it->second * dim_);
  }
}

std::span<const double> EmbeddingTable::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return oov_;
  return {storage_.data() + it->second * dim_, dim_};
}

void EmbeddingTable::set_oov_vector(std::span<const double> v) {
  if (v.size() != dim_) throw DataError("OOV vector width does not match table dimension");
  oov_.assign(v.begin(), v.end());
}

void ContextualStore::add(const std::string& id, Tensor vectors) {
  if (vectors.rank() != 2) {
    throw DataError("contextual vectors for '" + id + "' must be a (tokens x dim) matrix");
  }
  if (dim_ == 0) dim_ = vectors.dim(1);
  if (vectors.dim(1) != dim_) {
    throw DataError("contextual vectors for '" + id + "' have width " + std::to_string(vectors.dim(1)) +
                    ", expected " + std::to_string(dim_));
  }
  entries_.insert_or_assign(id, std::move(vectors));
}

void ContextualStore::merge(const ContextualStore& other) {
  for (const auto& [id, t] : other.entries_) {
    if (entries_.count(id)) throw DataError("contextual id '" + id + "' appears in more than one store");
  }
  for (const auto& [id, t] : other.entries_) add(id, t);
}

const Tensor* ContextualStore::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

bool parse_double(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_count_header(const std::vector<std::string_view>& fields) {
  if (fields.size() != 2) return false;
  for (std::string_view f : fields) {
    if (f.empty() || f.find_first_not_of("0123456789") != std::string_view::npos) return false;
  }
  return true;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

EmbeddingTable parse_embedding_table(std::istream& in, std::size_t expected_dim) {
  EmbeddingTable table(expected_dim);
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && expected_dim != 1 && is_count_header(fields)) continue;
    const std::string token(fields.front());
    if (fields.size() - 1 != expected_dim) {
      throw DataError("embedding row for token '" + token + "' (line " + std::to_string(line_no) +
                      ") has " + std::to_string(fields.size() - 1) + " values, expected " +
                      std::to_string(expected_dim));
    }
    values.resize(expected_dim);
    for (std::size_t k = 0; k < expected_dim; ++k) {
      if (!parse_double(fields[k + 1], values[k])) {
        throw DataError("embedding row for token '" + token + "' has a non-numeric value '" +
                        std::string(fields[k + 1]) + "'");
      }
    }
    table.add(token, values);
  }
  if (table.size() == 0) throw DataError("embedding file contains no vectors");
  return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file '" + path.string() + "'");
  return parse_embedding_table(in, expected_dim);
}

ContextualStore parse_contextual_store(std::istream& in) {
  ContextualStore store;
  std::size_t header_dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("contextual store line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.is_object()) throw DataError("contextual store line " + std::to_string(line_no) + ": expected an object");
    if (!row.contains("id")) {
      if (store.size() == 0 && row.contains("dim") && row["dim"].is_number_unsigned()) {
        header_dim = row["dim"].get<std::size_t>();
        store = ContextualStore(header_dim);
        continue;
      }
      throw DataError("contextual store line " + std::to_string(line_no) + ": missing \"id\"");
    }
    if (!row["id"].is_string()) {
      throw DataError("contextual store line " + std::to_string(line_no) + ": \"id\" must be a string");
    }
    const std::string id = row["id"].get<std::string>();
    if (!row.contains("vectors")) throw DataError("contextual store entry '" + id + "' has no vectors");
    const auto& vectors = row["vectors"];
    if (!vectors.is_array() || vectors.empty()) {
      throw DataError("contextual store entry '" + id + "' has no vectors");
    }
    const std::size_t rows = vectors.size();
    const std::size_t cols = vectors.front().size();
    if (cols == 0) throw DataError("contextual store entry '" + id + "' has empty rows");
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& r : vectors) {
      if (!r.is_array() || r.size() != cols) {
        throw DataError("contextual store entry '" + id + "' has ragged rows");
      }
      for (const auto& v : r) {
        if (!v.is_number()) throw DataError("contextual store entry '" + id + "' has a non-numeric value");
        data.push_back(v.get<double>());
      }
    }
    store.add(id, Tensor({rows, cols}, std::move(data)));
  }
  return store;
}

ContextualStore load_precomputed_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open contextual store '" + path.string() + "'");
  return parse_contextual_store(in);
}

std::vector<std::string> alignment_errors(const ContextualStore& store, const Dataset& d) {
  std::vector<std::string> bad;
  for (const Sentence& s : d.sentences) {
    const Tensor* t = store.find(s.embedding_key());
    if (!t || t->dim(0) != s.tokens.size()) bad.push_back(s.id);
  }
  return bad;
}

EmbeddingSource::EmbeddingSource(Variant source, double dropout_rate)
    : source_(std::move(source)), dropout_rate_(dropout_rate) {
  if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0) {
    throw ConfigError("embedding dropout must lie in [0, 1)");
  }
}

EmbeddingSource EmbeddingSource::from_table(std::shared_ptr<const EmbeddingTable> table, double dropout_rate) {
  if (!table) throw ConfigError("null embedding table");
  return EmbeddingSource(std::move(table), dropout_rate);
}

EmbeddingSource EmbeddingSource::from_store(std::shared_ptr<const ContextualStore> store, double dropout_rate) {
  if (!store) throw ConfigError("null contextual store");
  return EmbeddingSource(std::move(store), dropout_rate);
}

std::size_t EmbeddingSource::dim() const {
  return std::visit([](const auto& s) { return s->dim(); }, source_);
}

Tensor EmbeddingSource::embed(const Sentence& s) const {
  if (s.tokens.empty()) throw DataError("sentence '" + s.id + "' has no tokens");
  if (const auto* table = std::get_if<std::shared_ptr<const EmbeddingTable>>(&source_)) {
    const std::size_t d = (*table)->dim();
    Tensor out({s.tokens.size(), d});
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      const auto v = (*table)->lookup(s.tokens[t]);
      std::copy(v.begin(), v.end(), out.raw() + t * d);
    }
    return out;
  }
  const auto& store = std::get<std::shared_ptr<const ContextualStore>>(source_);
  const Tensor* entry = store->find(s.embedding_key());
  if (!entry) throw DataError("no contextual vectors for sentence '" + s.embedding_key() + "'");
  if (entry->dim(0) != s.tokens.size()) {
    throw DataError("contextual vectors for sentence '" + s.embedding_key() + "' have " +
                    std::to_string(entry->dim(0)) + " rows but the sentence has " +
                    std::to_string(s.tokens.size()) + " tokens");
  }
  return *entry;
}

}  // namespace tritrain
