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

// RFC-4180 CSV reading and writing.

#ifndef TRITRAIN_CSV_HPP_
#define TRITRAIN_CSV_HPP_

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tritrain::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Parses every record. Quoted fields may contain commas, doubled quotes and
/// line breaks; CRLF and LF line endings are both accepted. Throws DataError
/// naming the line on an unterminated quote or stray characters after a
/// closing quote.
std::vector<Row> read(std::istream& in);

/// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace tritrain::csv

#endif  // TRITRAIN_CSV_HPP_
