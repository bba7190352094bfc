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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "xlalign/diagnostics.hpp"
#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/retrieval.hpp"

namespace xlalign {
namespace {

using test_support::HubInstance;
using test_support::make_hub_instance;
using test_support::random_orthogonal;
using test_support::random_unit_rows;
using test_support::rotated_pairs;

class CapturedDiagnostics {
 public:
  CapturedDiagnostics()
      : previous_(set_diagnostic_sink([this](Severity s, std::string_view m) {
          if (s == Severity::kWarning) warnings.emplace_back(m);
        })) {}
  ~CapturedDiagnostics() { set_diagnostic_sink(std::move(previous_)); }
  std::vector<std::string> warnings;

 private:
  DiagnosticSink previous_;
};

RetrievalConfig config_for(Method method, double beta, std::size_t n_s) {
  RetrievalConfig cfg;
  cfg.method = method;
  cfg.beta = beta;
  cfg.n_s = n_s;
  return cfg;
}

OrthogonalMap identity_map(std::size_t d) {
  std::vector<double> ones(d, 1.0);
  return OrthogonalMap{Matrix::identity(d), ones, Matrix::identity(d), d};
}

PairedMatrices pairs_from(Matrix x, Matrix y) {
  PairedMatrices p;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    p.kept_pairs.emplace_back("s" + std::to_string(i), "t" + std::to_string(i));
  }
  p.x_d = std::move(x);
  p.y_d = std::move(y);
  p.stats.total = p.stats.kept = p.x_d.rows();
  return p;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// exp(beta S_ij) / sum_{n in all sources} exp(beta S_in), evaluated naively.
std::vector<double> inverted_softmax_oracle(std::size_t j, const Matrix& sources,
                                            const Matrix& targets, double beta) {
  std::vector<double> out(targets.rows());
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    double denom = 0.0;
    for (std::size_t n = 0; n < sources.rows(); ++n) {
      denom += std::exp(beta * dot(targets.row(i), sources.row(n)));
    }
    out[i] = std::exp(beta * dot(targets.row(i), sources.row(j))) / denom;
  }
  return out;
}

TEST(Similarity, SelfOrthogonalAndOracle) {
  const Matrix t = Matrix::identity(4);
  const auto s = similarity_scores(t.row(2), t);
  EXPECT_NEAR(s[2], 1.0, 1e-9);
  EXPECT_NEAR(s[0], 0.0, 1e-9);
  Rng rng(1);
  const Matrix targets = random_unit_rows(100, 20, rng);
  const Matrix q = random_unit_rows(1, 20, rng);
  const auto scores = similarity_scores(q.row(0), targets);
  for (std::size_t i = 0; i < 100; ++i) {
    double d = 0.0;
    for (std::size_t c = 0; c < 20; ++c) d += targets(i, c) * q(0, c);
    EXPECT_NEAR(scores[i], d, 1e-12);
    EXPECT_LE(std::abs(scores[i]), 1 + 1e-9);
  }
  EXPECT_THROW(similarity_scores(std::vector<double>(20, 0.0), targets), NumericalError);
  EXPECT_THROW(similarity_scores(std::vector<double>(20, 1.0), targets), UsageError);
}

TEST(NearestNeighbour, BasisQueryAndTies) {
  const Matrix basis = Matrix::identity(5);
  EXPECT_EQ(retrieve_nn(basis.row(2), basis, 1).indices.front(), 2u);
  Matrix tied = Matrix::identity(8);
  for (std::size_t c = 0; c < 8; ++c) tied(7, c) = tied(4, c);
  const auto r = retrieve_nn(tied.row(4), tied, 3);
  EXPECT_EQ(r.indices[0], 4u);
  EXPECT_EQ(r.indices[1], 7u);
}

TEST(NearestNeighbour, AgreesWithFullSortOracle) {
  Rng rng(2);
  const Matrix targets = random_unit_rows(200, 10, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = random_unit_rows(1, 10, rng);
    const auto scores = similarity_scores(q.row(0), targets);
    std::vector<std::size_t> order(200);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto r = retrieve_nn(q.row(0), targets, 15);
    EXPECT_EQ(r.indices, std::vector<std::size_t>(order.begin(), order.begin() + 15));
    EXPECT_TRUE(std::is_sorted(r.scores.rbegin(), r.scores.rend()));
  }
}

TEST(NearestNeighbour, ClampsOversizedTopKWithWarning) {
  CapturedDiagnostics diag;
  const Matrix basis = Matrix::identity(3);
  EXPECT_EQ(retrieve_nn(basis.row(0), basis, 10).size(), 3u);
  EXPECT_EQ(diag.warnings.size(), 1u);
  EXPECT_THROW(retrieve_nn(basis.row(0), basis, 0), UsageError);
}

TEST(Softmax, VanishingBetaIsUniform) {
  Rng rng(3);
  const Matrix src = random_unit_rows(4, 6, rng), tgt = random_unit_rows(9, 6, rng);
  const auto p = softmax_confidence(1, src, tgt, config_for(Method::kSoftmax, 1e-9, 1500));
  for (double v : p) EXPECT_NEAR(v, 1.0 / 9.0, 1e-6);
}

TEST(Softmax, ClosedFormTwoTargets) {
  const Matrix src = Matrix::from_rows({{1, 0}});
  const Matrix tgt = Matrix::from_rows({{1, 0}, {0, 1}});
  const auto p = softmax_confidence(0, src, tgt, config_for(Method::kSoftmax, std::log(9.0), 1));
  EXPECT_NEAR(p[0], 0.9, 1e-9);
  EXPECT_NEAR(p[1], 0.1, 1e-9);
}

TEST(SoftmaxProperty, SumsToOneAndArgmaxIsNearestNeighbour) {
  Rng rng(4);
  const Matrix src = random_unit_rows(30, 8, rng), tgt = random_unit_rows(50, 8, rng);
  for (int trial = 0; trial < 40; ++trial) {
    const double beta = std::exp(rng.normal() * 2.0);
    const std::size_t j = rng.uniform_index(30);
    RetrievalConfig cfg = config_for(Method::kSoftmax, beta, 1500);
    cfg.beta_max = std::max(beta, kDefaultBetaMax);
    const auto p = softmax_confidence(j, src, tgt, cfg);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(argmax(p), retrieve_nn(src.row(j), tgt, 1).indices.front());
  }
}

TEST(InvertedSoftmax, HubInstanceFavoursTrueTranslations) {
  const HubInstance h = make_hub_instance();
  std::size_t nn_hub_hits = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    if (retrieve_nn(h.sources.row(j), h.targets, 1).indices.front() == HubInstance::kHub) {
      ++nn_hub_hits;
    }
  }
  EXPECT_GE(nn_hub_hits, 2u);
  const auto cfg = config_for(Method::kInvertedSoftmax, 20.0, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto scores = inverted_softmax_scores(j, h.sources, h.targets, cfg);
    const auto oracle = inverted_softmax_oracle(j, h.sources, h.targets, 20.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      EXPECT_NEAR(scores[i], oracle[i], 1e-12 * std::max(1.0, oracle[i]));
    }
    EXPECT_EQ(argmax(scores), j);
    EXPECT_EQ(argmax(oracle), j);
  }
}

TEST(InvertedSoftmax, SingleSourceDenominatorCancelsNumerator) {
  // With one source the denominator equals the numerator: every score is 1
  // and the ranking falls back to target index order.
  Rng rng(5);
  const Matrix src = random_unit_rows(1, 7, rng), tgt = random_unit_rows(40, 7, rng);
  const auto cfg = config_for(Method::kInvertedSoftmax, 3.0, 1500);
  const auto scores = inverted_softmax_scores(0, src, tgt, cfg);
  for (double s : scores) EXPECT_NEAR(s, 1.0, 1e-12);
  const auto ranked = Retriever(src, tgt, cfg).rank(0, 5);
  EXPECT_EQ(ranked.indices, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(InvertedSoftmax, FullSampleOnOneQueryKeepsSimilarityOrderWhenDenominatorsAgree) {
  // Targets whose denominators over all sources coincide rank exactly as by
  // cosine: permuting source coordinates leaves sum_n exp(beta S_in) fixed.
  const Matrix src = Matrix::identity(4);
  const Matrix tgt = Matrix::from_rows({{0.1, 0.7, 0.7, 0.1},
                                        {0.7, 0.1, 0.1, 0.7},
                                        {0.7, 0.7, 0.1, 0.1}});
  Matrix unit = tgt;
  normalize_rows_in_place(unit);
  const auto cfg = config_for(Method::kInvertedSoftmax, 5.0, 1500);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto scores = inverted_softmax_scores(j, src, unit, cfg);
    EXPECT_EQ(argmax(scores), retrieve_nn(src.row(j), unit, 1).indices.front());
  }
}

TEST(InvertedSoftmax, RankingIgnoresOmittedNormalizer) {
  Rng rng(6);
  const Matrix src = random_unit_rows(60, 6, rng), tgt = random_unit_rows(45, 6, rng);
  const auto cfg = config_for(Method::kInvertedSoftmax, 8.0, 20);
  for (std::size_t j = 0; j < 10; ++j) {
    auto scores = inverted_softmax_scores(j, src, tgt, cfg);
    const double alpha = 1.0 / std::accumulate(scores.begin(), scores.end(), 0.0);
    std::vector<double> normalized = scores;
    for (double& v : normalized) v *= alpha;
    EXPECT_NEAR(std::accumulate(normalized.begin(), normalized.end(), 0.0), 1.0, 1e-12);
    EXPECT_EQ(top_candidates(scores, 45).indices, top_candidates(normalized, 45).indices);
  }
}

TEST(InvertedSoftmax, SampleAlwaysContainsQueryAndIsDeterministic) {
  RetrievalConfig cfg = config_for(Method::kInvertedSoftmax, 1.0, 10);
  for (std::size_t j : {0u, 57u, 999u}) {
    const auto s = denominator_sample(j, 1000, cfg);
    EXPECT_TRUE(std::binary_search(s.begin(), s.end(), j));
    EXPECT_GE(s.size(), 10u);
    EXPECT_LE(s.size(), 11u);
    EXPECT_EQ(s, denominator_sample(j, 1000, cfg));
  }
  EXPECT_NE(denominator_sample(1, 1000, cfg), denominator_sample(2, 1000, cfg));
  cfg.global_sample = true;
  auto a = denominator_sample(1, 1000, cfg), b = denominator_sample(2, 1000, cfg);
  a.erase(std::remove(a.begin(), a.end(), 1u), a.end());
  b.erase(std::remove(b.begin(), b.end(), 2u), b.end());
  a.erase(std::remove(a.begin(), a.end(), 2u), a.end());
  b.erase(std::remove(b.begin(), b.end(), 1u), b.end());
  EXPECT_EQ(a, b);
  cfg.n_s = 5000;
  EXPECT_EQ(denominator_sample(3, 1000, cfg).size(), 1000u);
}

TEST(InvertedSoftmax, StableAtLargeBeta) {
  Rng rng(7);
  const Matrix src = random_unit_rows(50, 5, rng), tgt = random_unit_rows(30, 5, rng);
  RetrievalConfig cfg = config_for(Method::kInvertedSoftmax, 1e4, 20);
  cfg.beta_max = 1e4;
  for (double v : inverted_softmax_log_scores(3, src, tgt, cfg)) EXPECT_TRUE(std::isfinite(v));
  for (double v : inverted_softmax_scores(3, src, tgt, cfg)) EXPECT_TRUE(std::isfinite(v));
  cfg.method = Method::kSoftmax;
  for (double v : softmax_confidence(3, src, tgt, cfg)) EXPECT_TRUE(std::isfinite(v));
}

TEST(Retriever, MatchesFreeFunctionsInEveryMode) {
  Rng rng(8);
  const Matrix src = random_unit_rows(300, 8, rng), tgt = random_unit_rows(150, 8, rng);
  for (bool global : {false, true}) {
    for (std::size_t n_s : {7u, 1500u}) {
      RetrievalConfig cfg = config_for(Method::kInvertedSoftmax, 6.0, n_s);
      cfg.global_sample = global;
      const Retriever r(src, tgt, cfg);
      for (std::size_t j : {0u, 11u, 299u}) {
        const auto keys = r.ranking_keys(j);
        const auto free = inverted_softmax_log_scores(j, src, tgt, cfg);
        for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_NEAR(keys[i], free[i], 1e-12);
        EXPECT_EQ(r.rank(j, 10).indices, top_candidates(free, 10).indices);
      }
    }
  }
  const Retriever nn(src, tgt, config_for(Method::kNearestNeighbour, 1.0, 1500));
  EXPECT_EQ(nn.rank(5, 4).indices, retrieve_nn(src.row(5), tgt, 4).indices);
  EXPECT_EQ(nn.rank_vector(src.row(5), 4).indices, retrieve_nn(src.row(5), tgt, 4).indices);
  const Retriever sm(src, tgt, config_for(Method::kSoftmax, 2.0, 1500));
  const auto p = softmax_confidence(5, src, tgt, config_for(Method::kSoftmax, 2.0, 1500));
  const auto top = sm.rank(5, 3);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(top.scores[k], p[top.indices[k]], 1e-12);
  EXPECT_THROW(Retriever(src, Matrix(3, 4), config_for(Method::kNearestNeighbour, 1, 1)),
               DimensionError);
}

TEST(Retriever, DeterministicAcrossRepeatedRuns) {
  Rng rng(9);
  const Matrix src = random_unit_rows(500, 6, rng), tgt = random_unit_rows(200, 6, rng);
  const auto cfg = config_for(Method::kInvertedSoftmax, 10.0, 50);
  const Retriever a(src, tgt, cfg), b(src, tgt, cfg);
  for (std::size_t j = 0; j < 500; j += 37) {
    EXPECT_EQ(a.ranking_keys(j), b.ranking_keys(j));
  }
}

TEST(RetrievalConfig, Validation) {
  RetrievalConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.beta = 300.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.beta = 1.0;
  cfg.n_s = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  EXPECT_EQ(kWordSampleCount, 1500u);
  EXPECT_EQ(kSentenceSampleCount, 12800u);
  EXPECT_EQ(parse_method("isf"), Method::kInvertedSoftmax);
  EXPECT_EQ(std::string(to_string(Method::kSoftmax)), "softmax");
  EXPECT_FALSE(parse_method("csls"));
}

TEST(FitBeta, SeparableDictionaryDiverges) {
  const Matrix x = Matrix::identity(4);
  const auto pairs = pairs_from(x, x);
  RetrievalConfig cfg;
  for (Method m : {Method::kSoftmax, Method::kInvertedSoftmax}) {
    const auto fit = fit_beta(pairs, identity_map(4), cfg, m);
    EXPECT_TRUE(fit.diverged);
    EXPECT_EQ(fit.beta, cfg.beta_max);
  }
}

TEST(FitBeta, LocalOptimalityProbe) {
  Rng rng(10);
  const auto pairs = rotated_pairs(120, 10, random_orthogonal(10, rng), 0.6, rng);
  const FittedMap map = fit_procrustes(pairs);
  RetrievalConfig cfg;
  for (Method m : {Method::kSoftmax, Method::kInvertedSoftmax}) {
    const auto fit = fit_beta(pairs, map, cfg, m);
    ASSERT_FALSE(fit.diverged);
    const BetaObjective objective(pairs, map, m);
    const double at = objective(fit.beta);
    EXPECT_NEAR(at, fit.log_likelihood, 1e-9 * std::abs(at));
    EXPECT_GE(at, objective(fit.beta / 2));
    EXPECT_GE(at, objective(std::min(2 * fit.beta, cfg.beta_max)));
  }
}

TEST(FitBeta, TwoPairToyMatchesDenseGrid) {
  // Pair 0 is ranked correctly, pair 1 is confused, so the optimum is finite.
  Matrix y = Matrix::from_rows({{0.8, 0.5, 0.33}, {0.2, 0.3, 0.93}});
  normalize_rows_in_place(y);
  const Matrix x = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}});
  const auto pairs = pairs_from(x, y);
  const double p = y(0, 0) - y(1, 0);  // S_00 - S_10 > 0
  const double q = y(0, 1) - y(1, 1);  // S_01 - S_11 > 0
  auto closed_form = [&](double b) {
    return -std::log1p(std::exp(-b * p)) - std::log1p(std::exp(b * q));
  };
  double best_beta = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double b = 0.0; b <= 200.0; b += 1e-4) {
    if (closed_form(b) > best) {
      best = closed_form(b);
      best_beta = b;
    }
  }
  const FittedMap map = identity_map(3);
  const auto fit = fit_beta(pairs, map, RetrievalConfig{}, Method::kSoftmax);
  EXPECT_FALSE(fit.diverged);
  EXPECT_NEAR(fit.beta, best_beta, 1e-3);
  EXPECT_NEAR(BetaObjective(pairs, map, Method::kSoftmax)(1.7), closed_form(1.7), 1e-12);
}

TEST(FitBeta, Preconditions) {
  const Matrix x = Matrix::identity(3);
  EXPECT_THROW(fit_beta(pairs_from(x, x), identity_map(3), RetrievalConfig{},
                        Method::kNearestNeighbour),
               UsageError);
  const Matrix one = Matrix::from_rows({{1, 0, 0}});
  EXPECT_THROW(fit_beta(pairs_from(one, one), identity_map(3), RetrievalConfig{},
                        Method::kSoftmax),
               UsageError);
}

TEST(HubCounts, OrthogonalToySetHasNoHubs) {
  const Matrix basis = Matrix::identity(6);
  const auto counts = hub_counts(basis, basis, identity_map(6));
  EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), 6u);
  for (auto c : counts) EXPECT_LE(c, 1u);
}

TEST(HubCounts, InvertedSoftmaxReducesTheHub) {
  const HubInstance h = make_hub_instance();
  const auto nn = hub_counts(h.sources, h.targets, identity_map(4));
  EXPECT_GE(nn[HubInstance::kHub], 2u);
  const Retriever isf(h.sources, h.targets, config_for(Method::kInvertedSoftmax, 20.0, 3));
  const std::vector<std::size_t> rows = {0, 1, 2};
  const auto inverted = hub_counts(isf, rows);
  EXPECT_LT(*std::max_element(inverted.begin(), inverted.end()),
            *std::max_element(nn.begin(), nn.end()));
  EXPECT_EQ(std::accumulate(inverted.begin(), inverted.end(), std::size_t{0}), 3u);
}

}  // namespace
}  // namespace xlalign
