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
#include <span>
#include <vector>

#include "xlalign/matrix.hpp"

namespace xlalign {

// ---------------------------------------------------------------------------
// Kernels. All accumulate in a fixed order, so results are bit-reproducible
// for a given input regardless of how callers split work across threads.
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

Matrix transpose(const Matrix& a);

/// a * b. Throws DimensionError naming both shapes when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * b^T, i.e. out(i, j) = dot(a.row(i), b.row(j)).
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

/// a^T * b for two matrices with the same number of rows. This is the
/// cross-covariance used for dictionary fits (n x d inputs, d x d output).
Matrix cross_product(const Matrix& a, const Matrix& b);

/// m * x for a vector x.
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

double frobenius_norm(const Matrix& a);

/// max |(q^T q - I)_ij|.
double orthonormality_error(const Matrix& q);

/// Divides each row by its L2 norm. Rows whose norm is below `zero_tol`
/// are left untouched and their indices returned.
std::vector<std::size_t> normalize_rows_in_place(Matrix& m, double zero_tol = 1e-300);

bool all_finite(const Matrix& m);

struct CenteredColumns {
  Matrix centered;
  std::vector<double> means;
};

/// Subtracts each column's mean. Requires at least one row.
CenteredColumns column_mean_center(const Matrix& m);

// ---------------------------------------------------------------------------
// Singular value decomposition.
// ---------------------------------------------------------------------------

/// Thin SVD m = u * diag(sigma) * v^T with r = min(rows, cols).
///
/// Invariants on return: sigma is non-negative and descending; u (rows x r)
/// and v (cols x r) have orthonormal columns; ties in sigma keep the working
/// column order; every column of u has its largest-magnitude entry positive.
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
  std::size_t sweeps{0};
};

struct SvdOptions {
  std::size_t max_sweeps{100};
  /// A pair of columns is considered orthogonal once |cos| falls below this.
  double tolerance{1e-12};
};

/// One-sided (Hestenes) Jacobi SVD. Tall inputs (rows >= 2 * cols) are first
/// reduced with a Householder QR so the sweeps run on the small R factor.
/// Throws SvdNotConvergedError after `max_sweeps`, NumericalError on
/// non-finite input.
SvdResult svd(const Matrix& m, const SvdOptions& options = {});

/// Minimum-norm solution of min ||a * x - b||_F, via the SVD of a.
/// Singular values below max(rows, cols) * eps * sigma_max are treated as 0.
Matrix solve_least_squares(const Matrix& a, const Matrix& b);

}  // namespace xlalign
