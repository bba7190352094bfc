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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlalign/matrix.hpp"

namespace xlalign {

/// Ordered token list; position is the frequency rank (0 = most frequent).
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws DataError on a duplicate token.
  explicit Vocabulary(std::vector<std::string> words);

  /// Appends a token; throws DataError naming it if already present.
  void add(std::string word);

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::string& operator[](std::size_t rank) const { return words_[rank]; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Vocabulary plus one embedding row per word.
struct EmbeddingSet {
  Vocabulary vocab;
  Matrix matrix;  // vocab.size() x dim
  bool normalized{false};

  std::size_t dim() const noexcept { return matrix.cols(); }
  std::size_t size() const noexcept { return vocab.size(); }

  /// Row for `word`, or nullopt when out of vocabulary.
  std::optional<std::span<const double>> lookup(std::string_view word) const;
};

/// Reads word2vec text format: optional "count dim" header, then
/// "word v1 ... vd" rows. Files ending in ".gz" are decompressed.
/// Keeps at most `limit` rows, in file order.
///
/// Errors (DataError): inconsistent dimension (with line number), duplicate
/// word, unparseable number (line and field), invalid UTF-8, empty file.
EmbeddingSet load_word2vec_text(const std::filesystem::path& path,
                                std::optional<std::size_t> limit = std::nullopt);

/// Writes word2vec text with a header; values use shortest round-trip form.
void save_word2vec_text(const EmbeddingSet& embeddings, const std::filesystem::path& path);

/// Scales every row to unit L2 norm. Idempotent. Throws DataError naming the
/// word if any row is all zeros.
EmbeddingSet normalize_rows(EmbeddingSet embeddings);

/// Same as lookup on the set.
std::optional<std::span<const double>> lookup(const EmbeddingSet& embeddings,
                                              std::string_view word);

}  // namespace xlalign
