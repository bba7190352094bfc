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
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xlalign/dictionary.hpp"
#include "xlalign/matrix.hpp"

namespace xlalign {

struct RetrievalConfig;

enum class Side { kSource, kTarget };

/// Orthogonal map O = u * v^T from the SVD of y_d^T x_d. Source vectors
/// enter the shared space through v^T, target vectors through u^T; only the
/// leading `rank` shared coordinates are kept.
struct OrthogonalMap {
  Matrix u;                   // d x d
  std::vector<double> sigma;  // descending
  Matrix v;                   // d x d
  std::size_t rank{0};

  std::size_t dim() const noexcept { return u.rows(); }
  /// O = u * v^T (maps source vectors onto target vectors).
  Matrix composed() const;
};

/// The same alignment viewed from the other language (u and v swapped).
OrthogonalMap transposed(const OrthogonalMap& map);

/// Unconstrained linear map W (y ~ W x).
struct LinearMap {
  Matrix w;  // d x d
};

/// Aligned source = (x - src_mean) * src_transform, and likewise for targets.
struct CcaMap {
  std::vector<double> src_mean;
  std::vector<double> tgt_mean;
  Matrix src_transform;  // d x rank
  Matrix tgt_transform;  // d x rank
  std::size_t rank{0};
};

using FittedMap = std::variant<OrthogonalMap, LinearMap, CcaMap>;

/// "procrustes", "lsq" or "cca".
std::string map_kind(const FittedMap& map);
/// Input embedding dimension the map expects.
std::size_t input_dim(const FittedMap& map);
/// Dimension of the shared space the map produces.
std::size_t shared_dim(const FittedMap& map);

// --- orthogonal Procrustes --------------------------------------------------

/// Maximizes sum_i y_i^T O x_i over orthogonal O. Reflections are allowed.
OrthogonalMap fit_procrustes(const PairedMatrices& pairs);

/// First `rank` components of v^T x; renormalized when rank < d.
std::vector<double> project_source(const OrthogonalMap& map, std::span<const double> x);
/// Row-wise project_source. All-zero reduced rows are left at zero.
Matrix project_source(const OrthogonalMap& map, const Matrix& rows);
std::vector<double> project_target(const OrthogonalMap& map, std::span<const double> y);
Matrix project_target(const OrthogonalMap& map, const Matrix& rows);

/// Keeps the leading k singular directions. Throws UsageError unless 1 <= k <= d.
OrthogonalMap reduce_rank(const OrthogonalMap& map, std::size_t k);

/// Mean over dictionary pairs of the retained part of y^T O x, i.e. the
/// shared-space dot product of the *unrenormalized* truncated projections.
/// Equals sum(sigma[0..rank)) / n.
double dictionary_mean_cosine(const OrthogonalMap& map, const PairedMatrices& pairs);

/// {d, d-20, d-40, ...} down to ceil(d/2), which is always included.
std::vector<std::size_t> default_rank_grid(std::size_t d);

/// Candidate rank maximizing precision@1 when each distinct training source
/// retrieves among the distinct training targets (hit = any of its dictionary
/// targets at rank 1). Ties go to the larger rank. Inverted-softmax
/// denominators use one shared sample here (see RetrievalConfig).
std::size_t select_rank(const OrthogonalMap& map, const PairedMatrices& train,
                        const RetrievalConfig& config, std::span<const std::size_t> candidates);

/// Precision@1 used by select_rank, for one rank.
double dictionary_precision_at_1(const OrthogonalMap& map, const PairedMatrices& train,
                                 const RetrievalConfig& config);

// --- least squares ------------------------------------------------------------

/// Minimum-norm minimizer of sum_i ||y_i - W x_i||^2.
LinearMap fit_least_squares(const PairedMatrices& pairs);

/// W x, not renormalized.
std::vector<double> apply_linear(const LinearMap& map, std::span<const double> x);

// --- CCA ------------------------------------------------------------------------

/// Two-view CCA through three SVDs of the centered dictionary matrices.
/// `rank` defaults to d. Throws NumericalError if either centered
/// dictionary matrix is rank-deficient.
CcaMap fit_cca(const PairedMatrices& pairs, std::optional<std::size_t> rank = std::nullopt);

/// (x - mean) * transform, L2-normalized. Throws NumericalError if the
/// projection is zero.
std::vector<double> apply_cca(const CcaMap& map, std::span<const double> x, Side side);

// --- shared space -----------------------------------------------------------------

/// Maps embedding rows into the space where retrieval compares them by dot
/// product. Output rows are unit-norm except rows that map to zero, which are
/// left at zero. Linear maps transform the source side only.
Matrix to_shared_space(const FittedMap& map, const Matrix& rows, Side side);

}  // namespace xlalign
