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

#include "tritrain/text_prep.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tritrain/csv.hpp"
#include "tritrain/error.hpp"

namespace tritrain {

std::string_view provenance_name(Provenance p) {
  return p == Provenance::gold ? "gold" : "pseudo";
}

namespace {

// Base letters for U+00C0..U+017F (Latin-1 Supplement letters and Latin
// Extended-A): the first code point of the canonical decomposition, with
// transliterations for letters that have none. Empty entries are symbols.
constexpr std::array<std::string_view, 0xC0> kLatinFold = {
    "A", "A", "A", "A", "A", "A", "AE", "C", "E", "E", "E", "E", "I", "I", "I", "I",
    "D", "N", "O", "O", "O", "O", "O", "", "O", "U", "U", "U", "U", "Y", "TH", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "", "o", "u", "u", "u", "u", "y", "th", "y",
    "A", "a", "A", "a", "A", "a", "C", "c", "C", "c", "C", "c", "C", "c", "D", "d",
    "D", "d", "E", "e", "E", "e", "E", "e", "E", "e", "E", "e", "G", "g", "G", "g",
    "G", "g", "G", "g", "H", "h", "H", "h", "I", "i", "I", "i", "I", "i", "I", "i",
    "I", "i", "IJ", "ij", "J", "j", "K", "k", "k", "L", "l", "L", "l", "L", "l", "L",
    "l", "L", "l", "N", "n", "N", "n", "N", "n", "n", "N", "n", "O", "o", "O", "o",
    "O", "o", "OE", "oe", "R", "r", "R", "r", "R", "r", "S", "s", "S", "s", "S", "s",
    "S", "s", "T", "t", "T", "t", "T", "t", "U", "u", "U", "u", "U", "u", "U", "u",
    "U", "u", "U", "u", "W", "w", "Y", "y", "Y", "Z", "z", "Z", "z", "Z", "z", "s",
};

constexpr std::string_view kPunctuation = ".,!?'\"-:;()/";

bool is_ascii_alnum(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
}

bool is_punct(char c) { return kPunctuation.find(c) != std::string_view::npos; }

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one UTF-8 sequence starting at s[i], advancing i. Malformed
// sequences decode to U+FFFD, which the cleaner drops.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i++]);
  if (b0 < 0x80) return b0;
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    return 0xFFFD;
  }
  for (int k = 0; k < extra; ++k) {
    if (i >= s.size()) return 0xFFFD;
    const auto b = static_cast<unsigned char>(s[i]);
    if ((b & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (b & 0x3F);
    ++i;
  }
  return cp;
}

// Replacement text for one code point; a single space marks whitespace.
std::string_view fold(char32_t c, char (&ascii)[2]) {
  if (c < 0x80) {
    if (is_space(c)) return " ";
    const char ch = static_cast<char>(c);
    if (is_ascii_alnum(c) || is_punct(ch)) {
      ascii[0] = ch;
      return {ascii, 1};
    }
    return {};
  }
  if (is_space(c)) return " ";
  if (c >= 0xC0 && c < 0x180) return kLatinFold[c - 0xC0];
  switch (c) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
      return "'";
    case 0x201C: case 0x201D: case 0x201E: case 0x2033:
      return "\"";
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015: case 0x2212:
      return "-";
    case 0x2026:
      return "...";
    default:
      // Combining marks (U+0300..U+036F) and everything else are dropped.
      return {};
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string clean_sentence(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  std::size_t i = 0;
  char ascii[2] = {0, 0};
  while (i < raw.size()) {
    const std::string_view piece = fold(next_code_point(raw, i), ascii);
    if (piece.empty()) continue;
    if (piece == " ") {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(piece);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view clean) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < clean.size()) {
    while (i < clean.size() && is_space(static_cast<unsigned char>(clean[i]))) ++i;
    std::size_t j = i;
    while (j < clean.size() && !is_space(static_cast<unsigned char>(clean[j]))) ++j;
    if (j == i) break;
    std::string word(clean.substr(i, j - i));
    for (char& ch : word) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    std::size_t b = 0;
    std::size_t e = word.size();
    while (b < e && is_punct(word[b])) ++b;
    while (e > b && is_punct(word[e - 1])) --e;
    for (std::size_t k = 0; k < b; ++k) tokens.emplace_back(1, word[k]);
    if (e > b) tokens.push_back(word.substr(b, e - b));
    for (std::size_t k = std::max(b, e); k < word.size(); ++k) tokens.emplace_back(1, word[k]);
    i = j;
  }
  return tokens;
}

Dataset filter_short(const Dataset& d, std::size_t min_tokens) {
  Dataset out;
  out.name = d.name;
  for (const Sentence& s : d.sentences) {
    if (s.tokens.size() >= min_tokens) out.sentences.push_back(s);
  }
  return out;
}

void check_unique_ids(const Dataset& d) {
  std::unordered_set<std::string> seen;
  seen.reserve(d.size());
  for (const Sentence& s : d.sentences) {
    if (!seen.insert(s.id).second) {
      throw DataError("dataset '" + d.name + "': duplicate id '" + s.id + "'");
    }
  }
}

namespace {

struct Columns {
  std::optional<std::size_t> id, sentence, label, source;
};

Columns locate_columns(const csv::Row& header) {
  Columns c;
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    const std::string name = trim(header.fields[i]);
    if (name == "id") c.id = i;
    else if (name == "sentence") c.sentence = i;
    else if (name == "label") c.label = i;
    else if (name == "source") c.source = i;
  }
  return c;
}

std::string where(const std::string& name, std::size_t line) {
  return name + ":" + std::to_string(line);
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& name, bool has_labels) {
  const std::vector<csv::Row> rows = csv::read(in);
  if (rows.empty()) throw DataError(name + ": missing header row");
  const Columns cols = locate_columns(rows.front());
  if (!cols.id || !cols.sentence) {
    throw DataError(where(name, rows.front().line) + ": header must name 'id' and 'sentence' columns");
  }
  if (has_labels && !cols.label) {
    throw DataError(where(name, rows.front().line) + ": header has no 'label' column");
  }

  Dataset d;
  d.name = name;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::size_t width = rows.front().fields.size();
    // Trailing label column may be omitted on unlabelled rows.
    const bool short_ok = !has_labels && cols.label && *cols.label == width - 1 &&
                          row.fields.size() == width - 1;
    if (row.fields.size() != width && !short_ok) {
      throw DataError(where(name, row.line) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(row.fields.size()));
    }
    RawRecord raw;
    raw.id = trim(row.fields[*cols.id]);
    raw.text = row.fields[*cols.sentence];
    if (raw.id.empty()) throw DataError(where(name, row.line) + ": empty id");
    if (has_labels) {
      const std::string label = trim(row.fields[*cols.label]);
      if (label != "0" && label != "1") {
        throw DataError(where(name, row.line) + ": label must be 0 or 1, got '" + label + "'");
      }
      raw.label = label == "1" ? 1 : 0;
    }
    if (!seen.insert(raw.id).second) {
      throw DataError(where(name, row.line) + ": duplicate id '" + raw.id + "'");
    }

    Sentence s;
    s.id = raw.id;
    s.tokens = tokenize(clean_sentence(raw.text));
    s.label = raw.label;
    if (s.tokens.empty()) {
      throw DataError(where(name, row.line) + ": sentence '" + raw.id + "' is empty after cleaning");
    }
    if (cols.source && *cols.source < row.fields.size()) {
      const std::string source = trim(row.fields[*cols.source]);
      if (source == "pseudo") {
        if (!s.label) throw DataError(where(name, row.line) + ": pseudo-labelled row without a label");
        s.source = Provenance::pseudo;
      } else if (source != "gold" && !source.empty()) {
        throw DataError(where(name, row.line) + ": unknown source '" + source + "'");
      }
    }
    d.sentences.push_back(std::move(s));
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.filename().string(), has_labels);
}

bool has_label_column(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  std::istringstream line(header);
  const auto rows = csv::read(line);
  return !rows.empty() && locate_columns(rows.front()).label.has_value();
}

void write_dataset(std::ostream& out, const Dataset& d, WriteOptions options) {
  std::vector<std::string> header = {"id", "sentence"};
  if (options.labels) header.emplace_back("label");
  if (options.source_column) header.emplace_back("source");
  csv::write_row(out, header);
  for (const Sentence& s : d.sentences) {
    std::string text;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (i) text.push_back(' ');
      text += s.tokens[i];
    }
    std::vector<std::string> fields = {s.id, std::move(text)};
    if (options.labels) fields.push_back(s.label ? std::to_string(*s.label) : std::string());
    if (options.source_column) fields.emplace_back(provenance_name(s.source));
    csv::write_row(out, fields);
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& d, WriteOptions options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  write_dataset(out, d, options);
}

std::size_t count_positive(const Dataset& d) {
  return static_cast<std::size_t>(std::count_if(d.sentences.begin(), d.sentences.end(),
                                                [](const Sentence& s) { return s.label == 1; }));
}

}  // namespace tritrain
