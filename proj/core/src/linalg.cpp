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
#include "xlalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xlalign/error.hpp"

namespace xlalign {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Four independent accumulators; fixed combination order.
double dot_raw(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

// Column-major working copy of a (rows x cols).
std::vector<double> to_column_major(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a(i, j);
  }
  return out;
}

Matrix from_column_major(const std::vector<double>& cols, std::size_t m, std::size_t n) {
  Matrix out(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) out(i, j) = cols[j * m + i];
  }
  return out;
}

// Hestenes one-sided Jacobi on an m x n column-major matrix (m >= n).
// On return the columns of `work` are mutually orthogonal (|cos| <= tol)
// and `v` (n x n column-major) holds the accumulated rotations.
std::size_t jacobi_orthogonalize(std::vector<double>& work, std::size_t m, std::size_t n,
                                 std::vector<double>& v, double negligible,
                                 const SvdOptions& options) {
  v.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) v[j * n + j] = 1.0;

  const double negligible_sq = negligible * negligible;
  std::vector<double> norm_sq(n);
  double max_cos = 0.0;

  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < n; ++j) {
      norm_sq[j] = dot_raw(&work[j * m], &work[j * m], m);
    }
    bool rotated = false;
    max_cos = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* ap = &work[p * m];
      double* vp = &v[p * n];
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norm_sq[p];
        const double beta = norm_sq[q];
        if (alpha <= negligible_sq || beta <= negligible_sq) continue;
        double* aq = &work[q * m];
        const double gamma = dot_raw(ap, aq, m);
        const double cosine = std::abs(gamma) / std::sqrt(alpha * beta);
        max_cos = std::max(max_cos, cosine);
        if (cosine <= options.tolerance) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        double* vq = &v[q * n];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
        norm_sq[p] = alpha - t * gamma;
        norm_sq[q] = beta + t * gamma;
      }
    }
    if (!rotated) return sweep;
  }
  throw SvdNotConvergedError(options.max_sweeps, max_cos);
}

// Extends the orthonormal columns in `basis` (m rows, column-major, `have`
// columns filled) to `want` columns using standard basis vectors.
void complete_orthonormal_basis(std::vector<double>& basis, std::size_t m, std::size_t have,
                                std::size_t want) {
  std::vector<double> cand(m);
  std::size_t next_unit = 0;
  // Some e_i always has squared residual >= (m - have) / m >= 1 / m.
  const double accept_sq = 0.5 / static_cast<double>(m);
  while (have < want) {
    if (next_unit >= m) throw NumericalError("failed to complete orthonormal basis");
    std::fill(cand.begin(), cand.end(), 0.0);
    cand[next_unit++] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < have; ++c) {
        const double* col = &basis[c * m];
        const double proj = dot_raw(col, cand.data(), m);
        for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * col[i];
      }
    }
    const double nsq = dot_raw(cand.data(), cand.data(), m);
    if (nsq <= accept_sq) continue;
    const double inv = 1.0 / std::sqrt(nsq);
    double* out = &basis[have * m];
    for (std::size_t i = 0; i < m; ++i) out[i] = cand[i] * inv;
    ++have;
  }
}

// Turns orthogonalized columns into (u, sigma, v), sorted by descending
// sigma with ties in working-column order.
SvdResult assemble(const std::vector<double>& work, std::size_t m, std::size_t n,
                   const std::vector<double>& v_cols, double negligible) {
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double nrm = std::sqrt(dot_raw(&work[j * m], &work[j * m], m));
    norms[j] = nrm <= negligible ? 0.0 : nrm;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  SvdResult out;
  out.sigma.resize(n);
  std::vector<double> u_cols(m * n, 0.0);
  std::vector<double> v_sorted(n * n);
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    std::copy_n(&v_cols[j * n], n, &v_sorted[k * n]);
    if (norms[j] > 0.0) {
      const double inv = 1.0 / norms[j];
      for (std::size_t i = 0; i < m; ++i) u_cols[k * m + i] = work[j * m + i] * inv;
      ++nonzero;
    }
  }
  complete_orthonormal_basis(u_cols, m, nonzero, n);
  out.u = from_column_major(u_cols, m, n);
  out.v = from_column_major(v_sorted, n, n);
  return out;
}

struct Householder {
  std::vector<std::vector<double>> vectors;  // vectors[k] acts on rows k..m-1
  std::vector<double> betas;
};

// In-place QR of an m x n column-major matrix (m >= n). Leaves R in the
// upper triangle of the leading n rows and zeros below.
Householder householder_qr(std::vector<double>& work, std::size_t m, std::size_t n) {
  Householder h;
  h.vectors.resize(n);
  h.betas.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double* col = &work[k * m];
    const std::size_t len = m - k;
    const double nrm = std::sqrt(dot_raw(col + k, col + k, len));
    if (nrm == 0.0) continue;
    const double alpha = col[k] >= 0.0 ? -nrm : nrm;
    std::vector<double> vec(col + k, col + m);
    vec[0] -= alpha;
    const double vtv = dot_raw(vec.data(), vec.data(), len);
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;
    col[k] = alpha;
    std::fill(col + k + 1, col + m, 0.0);
    for (std::size_t j = k + 1; j < n; ++j) {
      double* cj = &work[j * m] + k;
      const double s = beta * dot_raw(vec.data(), cj, len);
      for (std::size_t i = 0; i < len; ++i) cj[i] -= s * vec[i];
    }
    h.vectors[k] = std::move(vec);
    h.betas[k] = beta;
  }
  return h;
}

// z (m x cols, column-major) <- Q z.
void apply_q(const Householder& h, std::vector<double>& z, std::size_t m, std::size_t cols) {
  for (std::size_t k = h.betas.size(); k-- > 0;) {
    if (h.betas[k] == 0.0) continue;
    const auto& vec = h.vectors[k];
    const std::size_t len = m - k;
    for (std::size_t j = 0; j < cols; ++j) {
      double* zj = &z[j * m] + k;
      const double s = h.betas[k] * dot_raw(vec.data(), zj, len);
      for (std::size_t i = 0; i < len; ++i) zj[i] -= s * vec[i];
    }
  }
}

void canonicalize_signs(SvdResult& r) {
  for (std::size_t c = 0; c < r.u.cols(); ++c) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < r.u.rows(); ++i) {
      const double a = std::abs(r.u(i, c));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (r.u.rows() > 0 && r.u(best, c) < 0.0) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, c) = -r.u(i, c);
      for (std::size_t i = 0; i < r.v.rows(); ++i) r.v(i, c) = -r.v(i, c);
    }
  }
}

// Requires a.rows() >= a.cols().
SvdResult svd_tall(const Matrix& a, const SvdOptions& options) {
  const std::size_t m = a.rows(), n = a.cols();
  if (n == 0) {
    SvdResult r;
    r.u = Matrix(m, 0);
    r.v = Matrix(0, 0);
    return r;
  }
  const double negligible =
      kEps * static_cast<double>(std::max(m, n)) * frobenius_norm(a);
  std::vector<double> work = to_column_major(a);
  std::vector<double> v_cols;

  if (m >= 2 * n) {
    Householder h = householder_qr(work, m, n);
    std::vector<double> r_cols(n * n);
    for (std::size_t j = 0; j < n; ++j) std::copy_n(&work[j * m], n, &r_cols[j * n]);
    const std::size_t sweeps = jacobi_orthogonalize(r_cols, n, n, v_cols, negligible, options);
    SvdResult small = assemble(r_cols, n, n, v_cols, negligible);
    std::vector<double> z(m * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) z[j * m + i] = small.u(i, j);
    }
    apply_q(h, z, m, n);
    small.u = from_column_major(z, m, n);
    small.sweeps = sweeps;
    return small;
  }

  const std::size_t sweeps = jacobi_orthogonalize(work, m, n, v_cols, negligible, options);
  SvdResult r = assemble(work, m, n, v_cols, negligible);
  r.sweeps = sweeps;
  return r;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  return dot_raw(a.data(), b.data(), a.size());
}

double norm(std::span<const double> a) { return std::sqrt(dot_raw(a.data(), a.data(), a.size())); }

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape() + " by " + b.shape());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transposed: cannot multiply " + a.shape() +
                         " by the transpose of " + b.shape());
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t d = a.cols();
  constexpr std::size_t kBlock = 64;
  for (std::size_t jb = 0; jb < b.rows(); jb += kBlock) {
    const std::size_t je = std::min(b.rows(), jb + kBlock);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double* ai = a.row(i).data();
      double* oi = out.row(i).data();
      for (std::size_t j = jb; j < je; ++j) oi[j] = dot_raw(ai, b.row(j).data(), d);
    }
  }
  return out;
}

Matrix cross_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("cross_product: row counts differ (" + a.shape() + " vs " +
                         b.shape() + ")");
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    auto br = b.row(r);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double ap = ar[p];
      double* op = out.row(p).data();
      for (std::size_t q = 0; q < b.cols(); ++q) op[q] += ap * br[q];
    }
  }
  return out;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) {
    throw DimensionError("matvec: cannot apply " + m.shape() + " to a vector of length " +
                         std::to_string(x.size()));
  }
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot_raw(m.row(i).data(), x.data(), x.size());
  return out;
}

double frobenius_norm(const Matrix& a) {
  auto v = a.values();
  return std::sqrt(dot_raw(v.data(), v.data(), v.size()));
}

double orthonormality_error(const Matrix& q) {
  const Matrix gram = cross_product(q, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

std::vector<std::size_t> normalize_rows_in_place(Matrix& m, double zero_tol) {
  std::vector<std::size_t> zero_rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double nrm = norm(row);
    if (nrm < zero_tol || nrm == 0.0) {
      zero_rows.push_back(r);
      continue;
    }
    const double inv = 1.0 / nrm;
    for (double& x : row) x *= inv;
  }
  return zero_rows;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double x) { return std::isfinite(x); });
}

CenteredColumns column_mean_center(const Matrix& m) {
  if (m.rows() == 0) throw DimensionError("column_mean_center: matrix has no rows");
  CenteredColumns out{m, std::vector<double>(m.cols(), 0.0)};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out.means[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& mean : out.means) mean *= inv;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.centered.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] -= out.means[c];
  }
  return out;
}

SvdResult svd(const Matrix& m, const SvdOptions& options) {
  if (!all_finite(m)) throw NumericalError("svd: input " + m.shape() + " has non-finite entries");
  SvdResult r;
  if (m.rows() < m.cols()) {
    r = svd_tall(transpose(m), options);
    std::swap(r.u, r.v);
  } else {
    r = svd_tall(m, options);
  }
  canonicalize_signs(r);
  return r;
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("solve_least_squares: " + a.shape() + " system with " + b.shape() +
                         " right-hand side");
  }
  const SvdResult s = svd(a);
  Matrix coeffs = cross_product(s.u, b);  // r x p
  const double sigma_max = s.sigma.empty() ? 0.0 : s.sigma.front();
  const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) * kEps * sigma_max;
  for (std::size_t i = 0; i < s.sigma.size(); ++i) {
    auto row = coeffs.row(i);
    if (s.sigma[i] > cutoff) {
      const double inv = 1.0 / s.sigma[i];
      for (double& x : row) x *= inv;
    } else {
      std::fill(row.begin(), row.end(), 0.0);
    }
  }
  return matmul(s.v, coeffs);
}

}  // namespace xlalign
