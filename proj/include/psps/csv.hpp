// Copyright 2026 The psps-planner Authors
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

#ifndef PSPS_CSV_HPP_
#define PSPS_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace psps {

// Minimal comma-separated reader: no quoting, blank lines and lines
// starting with '#' skipped, surrounding whitespace trimmed.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;

  // Throws ParseError when the column is absent.
  int column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double number(std::size_t row, int col) const;
  int integer(std::size_t row, int col) const;
  const std::string& text(std::size_t row, int col) const;
};

CsvTable parse_csv(const std::string& text, const std::string& source);

double parse_double(std::string_view s, const std::string& what, int line = 0);
int parse_int(std::string_view s, const std::string& what, int line = 0);

// Shortest text that round-trips to the same double.
std::string format_double(double v);

}  // namespace psps

#endif  // PSPS_CSV_HPP_
