// Copyright 2026 The Edgewatt Authors. All Rights Reserved.
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

// Minimal comma-separated table IO shared by every file format of the
// toolkit. Fields never contain commas or quotes, so no quoting is supported.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgewatt {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

class CsvTable {
 public:
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Index of `name`; throws ParseError when absent.
  std::size_t require_column(std::string_view name) const;
};

/// Parses CSV text. Blank lines are skipped; every row must have exactly as
/// many fields as the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Strict numeric field parsing; `line` is used for error reporting.
double parse_double_field(std::string_view field, std::size_t line,
                          std::string_view column);
std::int64_t parse_int_field(std::string_view field, std::size_t line,
                             std::string_view column);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);
/// Fixed-point text with `digits` decimals (locale independent).
std::string format_fixed(double value, int digits);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a sibling temporary file and rename, so readers never observe a
/// partially written file.
void write_text_file_atomic(const std::filesystem::path& path,
                            std::string_view content);

}  // namespace edgewatt
