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
#include <string>
#include <utility>
#include <vector>

#include "xlalign/embeddings.hpp"
#include "xlalign/matrix.hpp"

namespace xlalign {

enum class Provenance { kExpert, kPseudo, kPhrase, kCustom };

const char* to_string(Provenance provenance);

using TokenPair = std::pair<std::string, std::string>;

/// Ordered (source, target) translation pairs. A source token may repeat
/// with different targets.
struct WordDictionary {
  std::vector<TokenPair> pairs;
  Provenance provenance{Provenance::kCustom};
};

struct DropStats {
  std::size_t total{0};
  std::size_t kept{0};
  std::size_t source_missing{0};  // includes pairs missing on both sides
  std::size_t target_missing{0};

  std::size_t dropped() const noexcept { return total - kept; }
};

/// Row-aligned unit vectors for the surviving dictionary pairs.
struct PairedMatrices {
  Matrix x_d;  // source rows, n x d
  Matrix y_d;  // target rows, n x d
  std::vector<TokenPair> kept_pairs;
  Provenance provenance{Provenance::kCustom};
  DropStats stats;

  std::size_t size() const noexcept { return x_d.rows(); }
  std::size_t dim() const noexcept { return x_d.cols(); }
};

/// Line-aligned tokenized sentences.
struct PhrasePairs {
  std::vector<std::vector<std::string>> source_sentences;
  std::vector<std::vector<std::string>> target_sentences;

  std::size_t size() const noexcept { return source_sentences.size(); }
};

/// Reads "source<TAB>target" lines. `swap_columns` reads target<TAB>source
/// instead (to reuse one file for the reverse direction).
/// Throws DataError on a line without exactly one tab or an empty file.
WordDictionary load_tsv_dictionary(const std::filesystem::path& path, bool swap_columns = false);

/// (w, w) for every byte-identical token present in both vocabularies, in
/// source rank order. Throws DataError when there are no matches.
WordDictionary build_pseudo_dictionary(const Vocabulary& source, const Vocabulary& target);

/// Looks up both sides of each pair; pairs with an out-of-vocabulary token
/// are dropped and counted. Requires normalized embeddings. Throws DataError
/// when every pair is dropped.
PairedMatrices resolve(const WordDictionary& dictionary, const EmbeddingSet& source,
                       const EmbeddingSet& target);

/// Normalized sum of the in-vocabulary token vectors, or nullopt when no
/// token is known or the sum has norm below 1e-10.
std::optional<std::vector<double>> sentence_vector(const std::vector<std::string>& tokens,
                                                   const EmbeddingSet& embeddings);

/// Skips `skip` leading lines of both files and then reads up to
/// `max_pairs` aligned lines (all remaining when nullopt), stopping at the
/// shorter file. Tokens are whitespace-split and lowercased.
PhrasePairs load_aligned_corpus(const std::filesystem::path& source_path,
                                const std::filesystem::path& target_path,
                                std::optional<std::size_t> max_pairs = std::nullopt,
                                std::size_t skip = 0);

/// Sentence-vector dictionary matrices; a pair is dropped when either side
/// has no sentence vector. kept_pairs holds the space-joined sentences.
PairedMatrices build_phrase_matrices(const PhrasePairs& pairs, const EmbeddingSet& source,
                                     const EmbeddingSet& target);

/// Dictionary rows deduplicated by token, with per-pair row indices.
/// Used wherever the training dictionary itself serves as a retrieval pool.
struct DictionaryIndex {
  Matrix sources;  // one row per distinct source token, first-seen order
  Matrix targets;  // one row per distinct target token, first-seen order
  std::vector<std::size_t> pair_source;  // per kept pair -> row of `sources`
  std::vector<std::size_t> pair_target;  // per kept pair -> row of `targets`
};

DictionaryIndex index_dictionary(const PairedMatrices& pairs);

}  // namespace xlalign
