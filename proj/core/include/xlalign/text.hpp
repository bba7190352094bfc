// Copyright 2026 The xlalign Authors.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xlalign {

bool is_valid_utf8(std::string_view text);

/// Splits on ASCII whitespace, dropping empty fields.
std::vector<std::string_view> split_whitespace(std::string_view line);

/// Lowercases ASCII letters and the Latin-1 supplement capitals
/// (U+00C0..U+00DE except U+00D7) inside UTF-8 text.
std::string lowercase(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict parse of an entire field; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view field);
std::optional<std::uint64_t> parse_uint(std::string_view field);

/// Line reader over a plain or gzip-compressed file (chosen by a ".gz"
/// suffix). Strips the trailing newline and any carriage return.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;

  bool next(std::string& line);
  /// 1-based number of the line most recently returned.
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t line_number_{0};
};

}  // namespace xlalign
