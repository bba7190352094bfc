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
#include "xlalign/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xlalign/diagnostics.hpp"
#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/random.hpp"

namespace xlalign {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Running log-sum-exp; the result depends only on the order values arrive in.
struct RunningLse {
  double max{kNegInf};
  double sum{0.0};

  void add(double v) {
    if (v > max) {
      sum = (max == kNegInf ? 0.0 : sum * std::exp(max - v)) + 1.0;
      max = v;
    } else {
      sum += std::exp(v - max);
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

// For every target row i: log sum_{n in sample} exp(beta * t_i . s_n).
std::vector<double> log_denominators(const Matrix& targets, const Matrix& sources,
                                     std::span<const std::size_t> sample, double beta) {
  const std::size_t nt = targets.rows();
  std::vector<RunningLse> acc(nt);
  constexpr std::size_t kTargetTile = 64;
  constexpr std::size_t kSampleTile = 64;
  double dots[kTargetTile][kSampleTile];
  for (std::size_t i0 = 0; i0 < nt; i0 += kTargetTile) {
    const std::size_t i1 = std::min(nt, i0 + kTargetTile);
    for (std::size_t n0 = 0; n0 < sample.size(); n0 += kSampleTile) {
      const std::size_t n1 = std::min(sample.size(), n0 + kSampleTile);
      for (std::size_t i = i0; i < i1; ++i) {
        const auto t = targets.row(i);
        for (std::size_t n = n0; n < n1; ++n) {
          dots[i - i0][n - n0] = dot(t, sources.row(sample[n]));
        }
      }
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t n = n0; n < n1; ++n) acc[i].add(beta * dots[i - i0][n - n0]);
      }
    }
  }
  std::vector<double> out(nt);
  for (std::size_t i = 0; i < nt; ++i) out[i] = acc[i].value();
  return out;
}

std::vector<double> query_similarities(std::size_t query, const Matrix& sources,
                                       const Matrix& targets) {
  if (query >= sources.rows()) {
    throw UsageError("query row " + std::to_string(query) + " out of range for " +
                     std::to_string(sources.rows()) + " sources");
  }
  if (sources.cols() != targets.cols()) {
    throw DimensionError("sources " + sources.shape() + " and targets " + targets.shape() +
                         " live in different spaces");
  }
  const auto q = sources.row(query);
  if (norm(q) == 0.0) {
    throw NumericalError("zero-norm query (source row " + std::to_string(query) + ")");
  }
  return matvec(targets, q);
}

std::vector<double> softmax_log_probs(std::vector<double> sims, double beta) {
  for (double& s : sims) s *= beta;
  const double lse = log_sum_exp(sims);
  for (double& s : sims) s -= lse;
  return sims;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kNearestNeighbour: return "nn";
    case Method::kSoftmax: return "softmax";
    case Method::kInvertedSoftmax: return "isf";
  }
  return "nn";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "nn") return Method::kNearestNeighbour;
  if (name == "softmax") return Method::kSoftmax;
  if (name == "isf" || name == "inverted_softmax") return Method::kInvertedSoftmax;
  return std::nullopt;
}

void RetrievalConfig::validate() const {
  if (!(beta_max > 0.0) || !std::isfinite(beta_max)) {
    throw UsageError("beta_max must be a positive finite number");
  }
  if (!(beta > 0.0) || beta > beta_max) {
    throw UsageError("beta " + std::to_string(beta) + " outside (0, " +
                     std::to_string(beta_max) + "]");
  }
  if (n_s < 1) throw UsageError("n_s must be at least 1");
}

ScoredCandidates top_candidates(std::span<const double> keys, std::size_t top_k) {
  const std::size_t k = std::min(top_k, keys.size());
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    return keys[a] > keys[b] || (keys[a] == keys[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  order.resize(k);
  ScoredCandidates out;
  out.scores.reserve(k);
  for (std::size_t i : order) out.scores.push_back(keys[i]);
  out.indices = std::move(order);
  return out;
}

std::vector<double> similarity_scores(std::span<const double> query, const Matrix& targets) {
  const double n = norm(query);
  if (n == 0.0) throw NumericalError("zero-norm query");
  if (std::abs(n - 1.0) > 1e-6) {
    throw UsageError("query is not unit-norm (norm " + std::to_string(n) + ")");
  }
  return matvec(targets, query);
}

ScoredCandidates retrieve_nn(std::span<const double> query, const Matrix& targets,
                             std::size_t top_k) {
  if (top_k == 0) throw UsageError("top_k must be at least 1");
  if (top_k > targets.rows()) {
    report_warning("top_k " + std::to_string(top_k) + " exceeds the " +
                   std::to_string(targets.rows()) + " available targets; clamping");
    top_k = targets.rows();
  }
  const auto scores = similarity_scores(query, targets);
  return top_candidates(scores, top_k);
}

std::vector<double> softmax_confidence(std::size_t query, const Matrix& sources,
                                       const Matrix& targets, const RetrievalConfig& config) {
  config.validate();
  auto logp = softmax_log_probs(query_similarities(query, sources, targets), config.beta);
  for (double& v : logp) v = std::exp(v);
  return logp;
}

std::vector<std::size_t> denominator_sample(std::size_t query, std::size_t source_count,
                                            const RetrievalConfig& config) {
  if (config.n_s >= source_count) {
    std::vector<std::size_t> all(source_count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  Rng rng(config.global_sample ? config.seed : derive_stream_seed(config.seed, query));
  auto sample = sample_without_replacement(source_count, config.n_s, rng);
  auto pos = std::lower_bound(sample.begin(), sample.end(), query);
  if (pos == sample.end() || *pos != query) sample.insert(pos, query);
  return sample;
}

std::vector<double> inverted_softmax_log_scores(std::size_t query, const Matrix& sources,
                                                const Matrix& targets,
                                                const RetrievalConfig& config) {
  config.validate();
  auto sims = query_similarities(query, sources, targets);
  const auto sample = denominator_sample(query, sources.rows(), config);
  const auto denom = log_denominators(targets, sources, sample, config.beta);
  for (std::size_t i = 0; i < sims.size(); ++i) sims[i] = config.beta * sims[i] - denom[i];
  return sims;
}

std::vector<double> inverted_softmax_scores(std::size_t query, const Matrix& sources,
                                            const Matrix& targets, const RetrievalConfig& config) {
  auto scores = inverted_softmax_log_scores(query, sources, targets, config);
  for (double& s : scores) s = std::exp(s);
  return scores;
}

Retriever::Retriever(const Matrix& sources, const Matrix& targets, RetrievalConfig config)
    : sources_(sources), targets_(targets), config_(config) {
  config_.validate();
  if (sources_.cols() != targets_.cols()) {
    throw DimensionError("sources " + sources_.shape() + " and targets " + targets_.shape() +
                         " live in different spaces");
  }
  if (config_.method != Method::kInvertedSoftmax) return;
  fixed_sample_ = config_.global_sample || config_.n_s >= sources_.rows();
  if (!fixed_sample_) return;
  if (config_.n_s >= sources_.rows()) {
    sample_.resize(sources_.rows());
    std::iota(sample_.begin(), sample_.end(), std::size_t{0});
  } else {
    Rng rng(config_.seed);
    sample_ = sample_without_replacement(sources_.rows(), config_.n_s, rng);
  }
  in_sample_.assign(sources_.rows(), 0);
  for (std::size_t n : sample_) in_sample_[n] = 1;
  log_denominator_ = log_denominators(targets_, sources_, sample_, config_.beta);
}

std::vector<double> Retriever::keys_from_similarities(std::vector<double> sims,
                                                      std::optional<std::size_t> query) const {
  switch (config_.method) {
    case Method::kNearestNeighbour:
      return sims;
    case Method::kSoftmax:
      return softmax_log_probs(std::move(sims), config_.beta);
    case Method::kInvertedSoftmax:
      break;
  }
  const double beta = config_.beta;
  if (fixed_sample_) {
    const bool add_query = query && !in_sample_[*query];
    for (std::size_t i = 0; i < sims.size(); ++i) {
      const double own = beta * sims[i];
      const double denom = add_query ? log_add_exp(log_denominator_[i], own) : log_denominator_[i];
      sims[i] = own - denom;
    }
    return sims;
  }
  std::vector<std::size_t> sample;
  if (query) {
    sample = denominator_sample(*query, sources_.rows(), config_);
  } else {
    Rng rng(config_.seed);
    sample = sample_without_replacement(sources_.rows(), config_.n_s, rng);
  }
  const auto denom = log_denominators(targets_, sources_, sample, beta);
  for (std::size_t i = 0; i < sims.size(); ++i) sims[i] = beta * sims[i] - denom[i];
  return sims;
}

std::vector<double> Retriever::ranking_keys(std::size_t query) const {
  return keys_from_similarities(query_similarities(query, sources_, targets_), query);
}

ScoredCandidates Retriever::rank(std::size_t query, std::size_t top_k) const {
  ScoredCandidates out = top_candidates(ranking_keys(query), top_k);
  if (config_.method != Method::kNearestNeighbour) {
    for (double& s : out.scores) s = std::exp(s);
  }
  return out;
}

ScoredCandidates Retriever::rank_vector(std::span<const double> query, std::size_t top_k) const {
  if (norm(query) == 0.0) throw NumericalError("zero-norm query");
  ScoredCandidates out =
      top_candidates(keys_from_similarities(matvec(targets_, query), std::nullopt), top_k);
  if (config_.method != Method::kNearestNeighbour) {
    for (double& s : out.scores) s = std::exp(s);
  }
  return out;
}

BetaObjective::BetaObjective(const PairedMatrices& train, const FittedMap& map, Method method)
    : method_(method) {
  if (method == Method::kNearestNeighbour) {
    throw UsageError("nearest-neighbour retrieval has no inverse temperature to fit");
  }
  DictionaryIndex index = index_dictionary(train);
  if (index.pair_source.size() < 2) throw UsageError("fit_beta needs at least 2 pairs");
  const Matrix sources = to_shared_space(map, index.sources, Side::kSource);
  const Matrix targets = to_shared_space(map, index.targets, Side::kTarget);
  similarity_ = matmul_transposed(targets, sources);
  pair_source_ = std::move(index.pair_source);
  pair_target_ = std::move(index.pair_target);
}

double BetaObjective::operator()(double beta) const {
  const std::size_t nt = similarity_.rows();
  const std::size_t ns = similarity_.cols();

  // Column-wise log-sum-exp of a row-major nt x ns matrix.
  auto column_lse = [&](const Matrix& values) {
    std::vector<double> max(ns, kNegInf), sum(ns, 0.0), out(ns);
    for (std::size_t i = 0; i < nt; ++i) {
      auto row = values.row(i);
      for (std::size_t j = 0; j < ns; ++j) max[j] = std::max(max[j], row[j]);
    }
    for (std::size_t i = 0; i < nt; ++i) {
      auto row = values.row(i);
      for (std::size_t j = 0; j < ns; ++j) sum[j] += std::exp(row[j] - max[j]);
    }
    for (std::size_t j = 0; j < ns; ++j) out[j] = max[j] + std::log(sum[j]);
    return out;
  };

  Matrix logits = similarity_;
  for (double& v : logits.values()) v *= beta;

  double total = 0.0;
  if (method_ == Method::kSoftmax) {
    const auto lse = column_lse(logits);
    for (std::size_t p = 0; p < pair_source_.size(); ++p) {
      total += logits(pair_target_[p], pair_source_[p]) - lse[pair_source_[p]];
    }
  } else {
    for (std::size_t i = 0; i < nt; ++i) {
      auto row = logits.row(i);
      const double lse = log_sum_exp(row);
      for (double& v : row) v -= lse;
    }
    const auto alpha = column_lse(logits);
    for (std::size_t p = 0; p < pair_source_.size(); ++p) {
      total += logits(pair_target_[p], pair_source_[p]) - alpha[pair_source_[p]];
    }
  }
  if (!std::isfinite(total)) {
    throw NumericalError("beta objective is not finite at beta = " + std::to_string(beta));
  }
  return total;
}

BetaFit fit_beta(const PairedMatrices& train, const FittedMap& map,
                 const RetrievalConfig& config_template, Method method) {
  const double beta_max = config_template.beta_max;
  if (!(beta_max > 0.0) || !std::isfinite(beta_max)) {
    throw UsageError("beta_max must be a positive finite number");
  }
  const BetaObjective objective(train, map, method);

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = 1e-6 * beta_max;
  double lo = 0.0, hi = beta_max;
  double c = hi - ratio * (hi - lo), d = lo + ratio * (hi - lo);
  double fc = objective(c), fd = objective(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = objective(d);
    }
  }
  BetaFit fit;
  fit.beta = fc >= fd ? c : d;
  fit.log_likelihood = std::max(fc, fd);
  const double at_cap = objective(beta_max);
  if (at_cap >= fit.log_likelihood || fit.beta >= beta_max - tol) {
    fit.beta = beta_max;
    fit.log_likelihood = at_cap;
    fit.diverged = true;
  }
  return fit;
}

std::vector<std::size_t> hub_counts(const Retriever& retriever,
                                    std::span<const std::size_t> source_rows) {
  std::vector<std::size_t> counts(retriever.target_count(), 0);
  if (retriever.target_count() == 0) return counts;
  for (std::size_t j : source_rows) ++counts[retriever.rank(j, 1).indices.front()];
  return counts;
}

std::vector<std::size_t> hub_counts(const Matrix& source_rows, const Matrix& target_rows,
                                    const FittedMap& map) {
  const Matrix sources = to_shared_space(map, source_rows, Side::kSource);
  const Matrix targets = to_shared_space(map, target_rows, Side::kTarget);
  const Retriever retriever(sources, targets, RetrievalConfig{});
  std::vector<std::size_t> all(sources.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return hub_counts(retriever, all);
}

}  // namespace xlalign
