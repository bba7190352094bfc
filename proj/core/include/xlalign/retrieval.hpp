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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlalign/alignment.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/matrix.hpp"

namespace xlalign {

enum class Method { kNearestNeighbour, kSoftmax, kInvertedSoftmax };

/// "nn", "softmax", "isf".
const char* to_string(Method method);
/// Accepts nn, softmax, isf and inverted_softmax.
std::optional<Method> parse_method(std::string_view name);

inline constexpr std::size_t kWordSampleCount = 1500;
inline constexpr std::size_t kSentenceSampleCount = 12800;
inline constexpr double kDefaultBetaMax = 200.0;
inline constexpr std::uint64_t kDefaultSeed = 42;

struct RetrievalConfig {
  Method method{Method::kNearestNeighbour};
  /// Inverse temperature; unused by nearest neighbour.
  double beta{1.0};
  /// Source rows sampled for the inverted-softmax denominator.
  std::size_t n_s{kWordSampleCount};
  std::uint64_t seed{kDefaultSeed};
  double beta_max{kDefaultBetaMax};
  /// Draw one denominator sample for all queries instead of one per query
  /// (stream derive_stream_seed(seed, query)). The query row is always added.
  bool global_sample{false};

  /// Throws UsageError unless beta is in (0, beta_max] and n_s >= 1.
  void validate() const;
};

/// Candidates sorted by descending score, ties by ascending index.
struct ScoredCandidates {
  std::vector<std::size_t> indices;
  std::vector<double> scores;

  std::size_t size() const noexcept { return indices.size(); }
};

/// The `top_k` best entries of `keys` (descending, ties by index).
ScoredCandidates top_candidates(std::span<const double> keys, std::size_t top_k);

/// score[i] = targets.row(i) . query. Throws NumericalError for a zero-norm
/// query and UsageError for one that is not unit-norm (1e-6).
std::vector<double> similarity_scores(std::span<const double> query, const Matrix& targets);

/// Nearest neighbours by cosine. top_k larger than the pool is clamped with a
/// warning; top_k == 0 is a UsageError.
ScoredCandidates retrieve_nn(std::span<const double> query, const Matrix& targets,
                             std::size_t top_k);

/// P(i) = exp(beta S_ij) / sum_m exp(beta S_mj) over all target rows, where
/// S_ij = targets.row(i) . sources.row(j).
std::vector<double> softmax_confidence(std::size_t query, const Matrix& sources,
                                       const Matrix& targets, const RetrievalConfig& config);

/// score(i) = exp(beta S_ij) / sum_{n in sample} exp(beta S_in). The
/// per-query normalizer over i is omitted, so these are ranking scores rather
/// than probabilities. Computed in the log domain.
std::vector<double> inverted_softmax_scores(std::size_t query, const Matrix& sources,
                                            const Matrix& targets, const RetrievalConfig& config);

/// log of inverted_softmax_scores; use this for ranking at large beta.
std::vector<double> inverted_softmax_log_scores(std::size_t query, const Matrix& sources,
                                                const Matrix& targets,
                                                const RetrievalConfig& config);

/// Denominator sample for one query: sorted source indices, always
/// containing `query`.
std::vector<std::size_t> denominator_sample(std::size_t query, std::size_t source_count,
                                            const RetrievalConfig& config);

/// Batch scorer over shared-space source and target rows. Holds references;
/// both matrices must outlive it. Safe to call concurrently.
class Retriever {
 public:
  Retriever(const Matrix& sources, const Matrix& targets, RetrievalConfig config);

  const RetrievalConfig& config() const noexcept { return config_; }
  std::size_t source_count() const noexcept { return sources_.rows(); }
  std::size_t target_count() const noexcept { return targets_.rows(); }

  /// Ranking keys over all targets for source row `query`: cosines (nn),
  /// log-probabilities (softmax) or log-scores (inverted softmax).
  std::vector<double> ranking_keys(std::size_t query) const;

  /// Top candidates; scores are cosines, probabilities or inverted-softmax
  /// scores depending on the method.
  ScoredCandidates rank(std::size_t query, std::size_t top_k) const;

  /// Ranks targets for an external shared-space query vector. Inverted
  /// softmax then uses the fixed sample without a query row.
  ScoredCandidates rank_vector(std::span<const double> query, std::size_t top_k) const;

 private:
  std::vector<double> keys_from_similarities(std::vector<double> sims,
                                             std::optional<std::size_t> query) const;

  const Matrix& sources_;
  const Matrix& targets_;
  RetrievalConfig config_;
  bool fixed_sample_{false};
  std::vector<std::size_t> sample_;
  std::vector<char> in_sample_;
  std::vector<double> log_denominator_;  // per target, over the fixed sample
};

// --- inverse temperature -----------------------------------------------------

/// Log-likelihood of the training pairs as a function of beta. Sources and
/// targets are the distinct dictionary rows in the shared space; the inverted
/// form normalizes over all training sources and includes the per-query
/// normalizer, so both methods give proper log-probabilities.
class BetaObjective {
 public:
  BetaObjective(const PairedMatrices& train, const FittedMap& map, Method method);

  double operator()(double beta) const;
  std::size_t pair_count() const noexcept { return pair_source_.size(); }

 private:
  Method method_;
  Matrix similarity_;  // targets x sources
  std::vector<std::size_t> pair_source_;
  std::vector<std::size_t> pair_target_;
};

struct BetaFit {
  double beta{1.0};
  bool diverged{false};
  double log_likelihood{0.0};
};

/// Golden-section search of BetaObjective over (0, beta_max]. Reports
/// diverged (and returns beta_max) when the cap is the maximizer. Throws
/// UsageError for nearest neighbour or fewer than 2 pairs, NumericalError on
/// a non-finite objective.
BetaFit fit_beta(const PairedMatrices& train, const FittedMap& map,
                 const RetrievalConfig& config_template, Method method);

// --- hubness ----------------------------------------------------------------------

/// For each target, how many of the given source rows retrieve it at rank 1.
std::vector<std::size_t> hub_counts(const Retriever& retriever,
                                    std::span<const std::size_t> source_rows);

/// Nearest-neighbour hub counts after mapping raw embedding rows into the
/// shared space.
std::vector<std::size_t> hub_counts(const Matrix& source_rows, const Matrix& target_rows,
                                    const FittedMap& map);

}  // namespace xlalign
