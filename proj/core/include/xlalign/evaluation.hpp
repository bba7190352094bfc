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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlalign/alignment.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/embeddings.hpp"
#include "xlalign/retrieval.hpp"

namespace xlalign {

struct FrequencyBin {
  std::size_t lower;  // inclusive rank
  std::size_t upper;  // exclusive rank
  std::string label;
};

/// [0,5k), [5k,20k), [20k,50k), [50k,100k), [100k,200k).
const std::vector<FrequencyBin>& frequency_bins();

/// Label of the bin holding `rank`, or nullopt past the last edge.
std::optional<std::string> frequency_bin_label(std::size_t rank);

struct TestEntry {
  std::string source;
  std::vector<std::string> valid_targets;  // first-seen order, no duplicates
  std::string bin;                         // empty when skipped or beyond 200k
  bool skipped{false};                     // source absent from the vocabulary
  std::size_t source_rank{0};

  bool operator==(const TestEntry&) const = default;
};

struct TestSet {
  std::vector<TestEntry> entries;  // first-seen source order
  std::vector<std::string> bins;

  std::size_t skipped() const;
};

/// Merges (source, target) lines by source and assigns frequency bins.
/// Throws DataError when no entry survives.
TestSet make_test_set(const std::vector<std::pair<std::string, std::string>>& lines,
                      const Vocabulary& source_vocab);

TestSet load_test_set(const std::filesystem::path& path, const Vocabulary& source_vocab);

struct PrecisionCounts {
  std::size_t evaluated{0};
  std::vector<std::size_t> hits;  // parallel to EvaluationReport::ks

  bool operator==(const PrecisionCounts&) const = default;
};

struct EvaluationReport {
  std::string mode{"word"};  // "word" or "sentence"
  std::string map_kind;
  Method method{Method::kNearestNeighbour};
  double beta{1.0};
  std::size_t n_s{0};
  std::uint64_t seed{kDefaultSeed};
  bool global_sample{false};
  std::size_t dim{0};
  std::size_t rank{0};
  std::vector<std::size_t> ks{1, 5, 10};

  std::size_t entries_total{0};
  std::size_t skipped_oov{0};
  /// Evaluated entries whose valid targets are all out of vocabulary; they
  /// count as misses.
  std::size_t all_targets_oov{0};
  PrecisionCounts overall;
  std::vector<std::pair<std::string, PrecisionCounts>> bins;
  /// Extra echo fields (input names, dictionary provenance, ...).
  std::map<std::string, std::string> labels;

  double precision(std::size_t k_index) const;
  double bin_precision(std::size_t bin_index, std::size_t k_index) const;
  /// Precision with all-targets-OOV entries excluded from the denominator.
  double precision_excluding_oov(std::size_t k_index) const;

  bool operator==(const EvaluationReport&) const = default;
};

struct EvaluationOptions {
  std::vector<std::size_t> ks{1, 5, 10};
  /// Worker threads; results do not depend on this.
  std::size_t threads{1};
};

EvaluationReport evaluate_words(const EmbeddingSet& source, const EmbeddingSet& target,
                                const FittedMap& map, const RetrievalConfig& config,
                                const TestSet& test, const EvaluationOptions& options = {});

/// Sentence vectors for the pool; pairs with an all-OOV side are dropped.
/// A hit at k is the aligned mate, or any candidate with the same token
/// sequence, in the top k over the remaining pool.
EvaluationReport evaluate_sentence_retrieval(const EmbeddingSet& source,
                                             const EmbeddingSet& target, const FittedMap& map,
                                             const RetrievalConfig& config,
                                             const PhrasePairs& pool, std::size_t n_queries,
                                             const EvaluationOptions& options = {});

inline constexpr int kReportFormatVersion = 1;

std::string serialize_report(const EvaluationReport& report);
EvaluationReport parse_report(std::string_view text);
void emit_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport load_report(const std::filesystem::path& path);

/// Flat one-line summary for aggregation across runs.
std::string tsv_summary_header(const EvaluationReport& report);
std::string tsv_summary_row(const EvaluationReport& report);

}  // namespace xlalign
