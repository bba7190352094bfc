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
#include "xlalign/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/retrieval.hpp"

namespace xlalign {
namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

void require_pairs(const PairedMatrices& p, std::size_t min_rows, const char* what) {
  if (p.x_d.rows() != p.y_d.rows() || p.x_d.cols() != p.y_d.cols()) {
    throw DimensionError(std::string(what) + ": paired matrices " + p.x_d.shape() + " and " +
                         p.y_d.shape() + " do not match");
  }
  if (p.x_d.rows() < min_rows) {
    throw UsageError(std::string(what) + ": needs at least " + std::to_string(min_rows) +
                     " pairs, got " + std::to_string(p.x_d.rows()));
  }
}

// First `rank` entries of basis^T x.
std::vector<double> project(const Matrix& basis, std::size_t rank, std::span<const double> x) {
  require_dim(x.size(), basis.rows(), "project");
  std::vector<double> out(rank, 0.0);
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    const double xi = x[i];
    auto b = basis.row(i);
    for (std::size_t c = 0; c < rank; ++c) out[c] += xi * b[c];
  }
  if (rank < basis.rows()) {
    const double nrm = norm(out);
    if (nrm > 0.0) {
      for (double& v : out) v /= nrm;
    }
  }
  return out;
}

Matrix project_rows(const Matrix& basis, std::size_t rank, const Matrix& rows) {
  require_dim(rows.cols(), basis.rows(), "project");
  Matrix out = matmul(rows, rank == basis.cols() ? basis : basis.leading_columns(rank));
  if (rank < basis.rows()) normalize_rows_in_place(out);
  return out;
}

Matrix scale_columns(const Matrix& m, const std::vector<double>& inverse_scale) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] /= inverse_scale[c];
  }
  return out;
}

struct CenteredSvd {
  std::vector<double> means;
  SvdResult svd;
};

CenteredSvd centered_svd(const Matrix& m, const char* side) {
  CenteredColumns c = column_mean_center(m);
  CenteredSvd out{std::move(c.means), svd(c.centered)};
  const double smax = out.svd.sigma.empty() ? 0.0 : out.svd.sigma.front();
  const double cutoff = static_cast<double>(std::max(m.rows(), m.cols())) *
                        std::numeric_limits<double>::epsilon() * smax;
  for (std::size_t i = 0; i < out.svd.sigma.size(); ++i) {
    if (!(out.svd.sigma[i] > cutoff)) {
      throw NumericalError(std::string("fit_cca: centered ") + side +
                           " dictionary is rank-deficient (singular value " +
                           std::to_string(i) + " is zero); reduce the dimension first");
    }
  }
  return out;
}

}  // namespace

Matrix OrthogonalMap::composed() const { return matmul_transposed(u, v); }

OrthogonalMap transposed(const OrthogonalMap& map) {
  return OrthogonalMap{map.v, map.sigma, map.u, map.rank};
}

std::string map_kind(const FittedMap& map) {
  struct Visitor {
    std::string operator()(const OrthogonalMap&) const { return "procrustes"; }
    std::string operator()(const LinearMap&) const { return "lsq"; }
    std::string operator()(const CcaMap&) const { return "cca"; }
  };
  return std::visit(Visitor{}, map);
}

std::size_t input_dim(const FittedMap& map) {
  struct Visitor {
    std::size_t operator()(const OrthogonalMap& m) const { return m.dim(); }
    std::size_t operator()(const LinearMap& m) const { return m.w.cols(); }
    std::size_t operator()(const CcaMap& m) const { return m.src_transform.rows(); }
  };
  return std::visit(Visitor{}, map);
}

std::size_t shared_dim(const FittedMap& map) {
  struct Visitor {
    std::size_t operator()(const OrthogonalMap& m) const { return m.rank; }
    std::size_t operator()(const LinearMap& m) const { return m.w.rows(); }
    std::size_t operator()(const CcaMap& m) const { return m.rank; }
  };
  return std::visit(Visitor{}, map);
}

OrthogonalMap fit_procrustes(const PairedMatrices& pairs) {
  require_pairs(pairs, 1, "fit_procrustes");
  const Matrix m = cross_product(pairs.y_d, pairs.x_d);  // y_d^T x_d
  SvdResult s = svd(m);
  const std::size_t d = m.rows();
  return OrthogonalMap{std::move(s.u), std::move(s.sigma), std::move(s.v), d};
}

std::vector<double> project_source(const OrthogonalMap& map, std::span<const double> x) {
  return project(map.v, map.rank, x);
}

Matrix project_source(const OrthogonalMap& map, const Matrix& rows) {
  return project_rows(map.v, map.rank, rows);
}

std::vector<double> project_target(const OrthogonalMap& map, std::span<const double> y) {
  return project(map.u, map.rank, y);
}

Matrix project_target(const OrthogonalMap& map, const Matrix& rows) {
  return project_rows(map.u, map.rank, rows);
}

OrthogonalMap reduce_rank(const OrthogonalMap& map, std::size_t k) {
  if (k < 1 || k > map.dim()) {
    throw UsageError("rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(map.dim()) + "]");
  }
  OrthogonalMap out = map;
  out.rank = k;
  return out;
}

double dictionary_mean_cosine(const OrthogonalMap& map, const PairedMatrices& pairs) {
  require_pairs(pairs, 1, "dictionary_mean_cosine");
  const Matrix xs = matmul(pairs.x_d, map.v.leading_columns(map.rank));
  const Matrix ys = matmul(pairs.y_d, map.u.leading_columns(map.rank));
  double total = 0.0;
  for (std::size_t i = 0; i < xs.rows(); ++i) total += dot(xs.row(i), ys.row(i));
  return total / static_cast<double>(xs.rows());
}

std::vector<std::size_t> default_rank_grid(std::size_t d) {
  std::vector<std::size_t> grid;
  if (d == 0) return grid;
  const std::size_t floor_rank = (d + 1) / 2;
  for (std::size_t k = d; k >= floor_rank; k -= std::min<std::size_t>(20, k)) {
    grid.push_back(k);
    if (k < 20) break;
  }
  if (grid.back() != floor_rank) grid.push_back(floor_rank);
  return grid;
}

double dictionary_precision_at_1(const OrthogonalMap& map, const PairedMatrices& train,
                                 const RetrievalConfig& config) {
  const DictionaryIndex index = index_dictionary(train);
  const Matrix sources = project_source(map, index.sources);
  const Matrix targets = project_target(map, index.targets);
  RetrievalConfig cfg = config;
  // Per-query samples would cost |targets| * n_s * d per training word.
  cfg.global_sample = true;
  const Retriever retriever(sources, targets, cfg);

  std::vector<std::unordered_set<std::size_t>> valid(sources.rows());
  for (std::size_t p = 0; p < index.pair_source.size(); ++p) {
    valid[index.pair_source[p]].insert(index.pair_target[p]);
  }
  std::size_t hits = 0;
  for (std::size_t s = 0; s < sources.rows(); ++s) {
    const ScoredCandidates top = retriever.rank(s, 1);
    if (!top.indices.empty() && valid[s].count(top.indices.front())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sources.rows());
}

std::size_t select_rank(const OrthogonalMap& map, const PairedMatrices& train,
                        const RetrievalConfig& config, std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw UsageError("select_rank: no candidate ranks");
  for (std::size_t k : candidates) {
    if (k < 1 || k > map.dim()) {
      throw UsageError("select_rank: candidate rank " + std::to_string(k) + " outside [1, " +
                       std::to_string(map.dim()) + "]");
    }
  }
  if (candidates.size() == 1) return candidates.front();
  std::size_t best_rank = 0;
  double best_precision = -1.0;
  for (std::size_t k : candidates) {
    const double p = dictionary_precision_at_1(reduce_rank(map, k), train, config);
    if (p > best_precision || (p == best_precision && k > best_rank)) {
      best_precision = p;
      best_rank = k;
    }
  }
  return best_rank;
}

LinearMap fit_least_squares(const PairedMatrices& pairs) {
  require_pairs(pairs, 1, "fit_least_squares");
  // y_d ~ x_d W^T, so W^T is the least-squares solution for x_d.
  return LinearMap{transpose(solve_least_squares(pairs.x_d, pairs.y_d))};
}

std::vector<double> apply_linear(const LinearMap& map, std::span<const double> x) {
  return matvec(map.w, x);
}

CcaMap fit_cca(const PairedMatrices& pairs, std::optional<std::size_t> rank) {
  require_pairs(pairs, 2, "fit_cca");
  const std::size_t d = pairs.dim();
  const std::size_t k = rank.value_or(d);
  if (k < 1 || k > d) {
    throw UsageError("fit_cca: rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(d) + "]");
  }
  CenteredSvd xs = centered_svd(pairs.x_d, "source");  // X' = Q_D S_X V_X^T
  CenteredSvd ys = centered_svd(pairs.y_d, "target");  // Y' = W_D S_Y V_Y^T
  if (xs.svd.sigma.size() != d || ys.svd.sigma.size() != d) {
    throw NumericalError("fit_cca: need more dictionary pairs than dimensions");
  }
  // M' = Q_D^T W_D = U' S' V'^T
  const SvdResult inner = svd(cross_product(xs.svd.u, ys.svd.u));

  CcaMap out;
  out.src_mean = std::move(xs.means);
  out.tgt_mean = std::move(ys.means);
  out.src_transform =
      matmul(scale_columns(xs.svd.v, xs.svd.sigma), inner.u.leading_columns(k));
  out.tgt_transform =
      matmul(scale_columns(ys.svd.v, ys.svd.sigma), inner.v.leading_columns(k));
  out.rank = k;
  return out;
}

std::vector<double> apply_cca(const CcaMap& map, std::span<const double> x, Side side) {
  const auto& mean = side == Side::kSource ? map.src_mean : map.tgt_mean;
  const Matrix& transform = side == Side::kSource ? map.src_transform : map.tgt_transform;
  require_dim(x.size(), transform.rows(), "apply_cca");
  std::vector<double> out(transform.cols(), 0.0);
  for (std::size_t i = 0; i < transform.rows(); ++i) {
    const double xi = x[i] - mean[i];
    auto row = transform.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += xi * row[c];
  }
  const double nrm = norm(out);
  if (!(nrm > 0.0)) throw NumericalError("apply_cca: vector projects to zero");
  for (double& v : out) v /= nrm;
  return out;
}

Matrix to_shared_space(const FittedMap& map, const Matrix& rows, Side side) {
  struct Visitor {
    const Matrix& rows;
    Side side;
    Matrix operator()(const OrthogonalMap& m) const {
      Matrix out = side == Side::kSource ? project_source(m, rows) : project_target(m, rows);
      if (m.rank == m.dim()) normalize_rows_in_place(out);
      return out;
    }
    Matrix operator()(const LinearMap& m) const {
      require_dim(rows.cols(), m.w.cols(), "to_shared_space");
      Matrix out = side == Side::kSource ? matmul_transposed(rows, m.w) : rows;
      normalize_rows_in_place(out);
      return out;
    }
    Matrix operator()(const CcaMap& m) const {
      const auto& mean = side == Side::kSource ? m.src_mean : m.tgt_mean;
      const Matrix& transform = side == Side::kSource ? m.src_transform : m.tgt_transform;
      require_dim(rows.cols(), transform.rows(), "to_shared_space");
      Matrix centered = rows;
      for (std::size_t r = 0; r < centered.rows(); ++r) {
        auto row = centered.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] -= mean[c];
      }
      Matrix out = matmul(centered, transform);
      normalize_rows_in_place(out);
      return out;
    }
  };
  return std::visit(Visitor{rows, side}, map);
}

}  // namespace xlalign
