// Copyright 2026 The muon-lab Authors.
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

#include "muonlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "muonlab/errors.hpp"
#include "muonlab/kernels.hpp"
#include "muonlab/rng.hpp"

namespace muonlab {
namespace {

constexpr double kJacobiTol = 1e-12;
constexpr int kMaxSweeps = 60;

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void rotate(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Jacobi on the rows of `cols_t` (k x m, each row a column of the tall
// matrix). On return the rows are mutually orthogonal and `v_t` (k x k) holds
// the accumulated rotations.
void jacobi_orthogonalize(DenseMatrix& cols_t, DenseMatrix& v_t) {
  const std::size_t k = cols_t.rows();
  const std::size_t m = cols_t.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  const double negligible = eps * eps * dot(cols_t.data(), cols_t.data(), cols_t.size());
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        double* xp = cols_t.data() + p * m;
        double* xq = cols_t.data() + q * m;
        const double alpha = dot(xp, xp, m);
        const double beta = dot(xq, xq, m);
        const double gamma = dot(xp, xq, m);
        if (std::min(alpha, beta) <= negligible) continue;
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(xp, xq, m, c, s);
        rotate(v_t.data() + p * k, v_t.data() + q * k, k, c, s);
        rotated = true;
      }
    }
    if (!rotated) return;
  }
  throw DecompositionError("thin_svd: Jacobi did not converge in " + std::to_string(kMaxSweeps) +
                           " sweeps");
}

// Replaces row `j` of `u_t` by a unit vector orthogonal to rows [0, j).
void complete_basis(DenseMatrix& u_t, std::size_t j) {
  const std::size_t m = u_t.cols();
  double* target = u_t.data() + j * m;
  for (std::size_t e = 0; e < m; ++e) {
    std::fill(target, target + m, 0.0);
    target[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double* prev = u_t.data() + i * m;
        const double proj = dot(prev, target, m);
        for (std::size_t r = 0; r < m; ++r) target[r] -= proj * prev[r];
      }
    }
    const double norm = std::sqrt(dot(target, target, m));
    if (norm > 0.5) {
      for (std::size_t r = 0; r < m; ++r) target[r] /= norm;
      return;
    }
  }
  throw DecompositionError("thin_svd: failed to complete the left basis");
}

// SVD of a tall-or-square matrix (rows >= cols).
SvdFactors svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  DenseMatrix u_t = a.transpose();
  DenseMatrix v_t = DenseMatrix::identity(k);
  jacobi_orthogonalize(u_t, v_t);

  std::vector<double> sigma(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double* x = u_t.data() + j * m;
    sigma[j] = std::sqrt(dot(x, x, m));
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdFactors f;
  f.singular_values.resize(k);
  DenseMatrix su_t(k, m);
  DenseMatrix sv_t(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    std::copy_n(u_t.data() + order[j] * m, m, su_t.data() + j * m);
    std::copy_n(v_t.data() + order[j] * k, k, sv_t.data() + j * k);
    f.singular_values[j] = sigma[order[j]];
  }
  const double smax = f.singular_values.front();
  const double zero_tol =
      static_cast<double>(m) * std::numeric_limits<double>::epsilon() * smax;
  for (std::size_t j = 0; j < k; ++j) {
    double* uj = su_t.data() + j * m;
    if (f.singular_values[j] <= zero_tol || f.singular_values[j] == 0.0) {
      f.singular_values[j] = 0.0;
      complete_basis(su_t, j);
    } else {
      const double inv = 1.0 / f.singular_values[j];
      for (std::size_t r = 0; r < m; ++r) uj[r] *= inv;
    }
    // Sign convention: largest-magnitude left entry positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < m; ++r) {
      if (std::abs(uj[r]) > std::abs(uj[arg])) arg = r;
    }
    if (uj[arg] < 0.0) {
      for (std::size_t r = 0; r < m; ++r) uj[r] = -uj[r];
      double* vj = sv_t.data() + j * k;
      for (std::size_t r = 0; r < k; ++r) vj[r] = -vj[r];
    }
  }
  f.left_vectors = su_t.transpose();
  f.right_vectors = sv_t.transpose();
  return f;
}

void fix_left_sign(SvdFactors& f) {
  const std::size_t m = f.left_vectors.rows();
  for (std::size_t j = 0; j < f.singular_values.size(); ++j) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < m; ++r) {
      if (std::abs(f.left_vectors(r, j)) > std::abs(f.left_vectors(arg, j))) arg = r;
    }
    if (f.left_vectors(arg, j) < 0.0) {
      for (std::size_t r = 0; r < m; ++r) f.left_vectors(r, j) = -f.left_vectors(r, j);
      for (std::size_t r = 0; r < f.right_vectors.rows(); ++r) {
        f.right_vectors(r, j) = -f.right_vectors(r, j);
      }
    }
  }
}

void require_finite(const DenseMatrix& m, const char* op) {
  if (m.empty()) throw DomainError(std::string(op) + ": empty matrix");
  if (!m.all_finite()) throw InvalidInputError(std::string(op) + ": non-finite entry");
}

template <class MatNT, class Mat>
DenseMatrix newton_schulz_impl(const DenseMatrix& x0, const PolyCoeffs& p, int steps,
                               MatNT&& mat_nt, Mat&& mat) {
  if (steps < 1) throw DomainError("newton_schulz: steps must be >= 1");
  require_finite(x0, "newton_schulz");
  const bool transposed = x0.rows() > x0.cols();
  DenseMatrix x = transposed ? x0.transpose() : x0;
  for (int k = 1; k <= steps; ++k) {
    const DenseMatrix gram = mat_nt(x, x);
    DenseMatrix poly = mat(gram, gram);
    poly *= p.c;
    poly.axpy(p.b, gram);
    DenseMatrix next = mat(poly, x);
    next.axpy(p.a, x);
    if (!next.all_finite()) {
      throw OverflowError("newton_schulz: non-finite entries at step " + std::to_string(k));
    }
    x = std::move(next);
  }
  return transposed ? x.transpose() : x;
}

}  // namespace

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.entries()) s += v * v;
  return std::sqrt(s);
}

double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw DomainError("frobenius_inner: shape mismatch");
  return dot(a.data(), b.data(), a.size());
}

DenseMatrix SvdFactors::reconstruct() const {
  DenseMatrix scaled = left_vectors;
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(r, j) *= singular_values[j];
  }
  return matmul_nt(scaled, right_vectors);
}

SvdFactors thin_svd(const DenseMatrix& m) {
  require_finite(m, "thin_svd");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdFactors t = svd_tall(m.transpose());
  SvdFactors f{std::move(t.right_vectors), std::move(t.singular_values),
               std::move(t.left_vectors)};
  fix_left_sign(f);
  return f;
}

std::vector<double> singular_values(const DenseMatrix& m) { return thin_svd(m).singular_values; }

double operator_norm(const DenseMatrix& m) { return singular_values(m).front(); }

EffectiveRank effective_rank_of_spectrum(std::span<const double> sigma, std::size_t min_dim) {
  double total = 0.0;
  for (double s : sigma) {
    if (s < 0.0 || !std::isfinite(s)) throw DomainError("effective_rank: invalid singular value");
    total += s;
  }
  if (total <= 0.0) throw DomainError("effective_rank: zero matrix");
  double h = 0.0;
  for (double s : sigma) {
    if (s <= 0.0) continue;
    const double q = s / total;
    h -= q * std::log(q);
  }
  EffectiveRank r;
  r.value = std::exp(h);
  r.normalized_entropy = min_dim > 1 ? h / std::log(static_cast<double>(min_dim)) : 0.0;
  return r;
}

EffectiveRank effective_rank(const DenseMatrix& m) {
  require_finite(m, "effective_rank");
  return effective_rank_of_spectrum(singular_values(m), std::min(m.rows(), m.cols()));
}

DenseMatrix newton_schulz(const DenseMatrix& x0, const PolyCoeffs& coeffs, int steps) {
  return newton_schulz_impl(
      x0, coeffs, steps, [](const DenseMatrix& a, const DenseMatrix& b) { return matmul_nt(a, b); },
      [](const DenseMatrix& a, const DenseMatrix& b) { return matmul(a, b); });
}

DenseMatrix newton_schulz_reference(const DenseMatrix& x0, const PolyCoeffs& coeffs, int steps) {
  return newton_schulz_impl(
      x0, coeffs, steps,
      [](const DenseMatrix& a, const DenseMatrix& b) { return reference::matmul_nt(a, b); },
      [](const DenseMatrix& a, const DenseMatrix& b) { return reference::matmul(a, b); });
}

SingularTriplet top_singular_triplet(const DenseMatrix& m, std::uint64_t seed, int max_iter,
                                     double tol) {
  require_finite(m, "top_singular_triplet");
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Rng rng(seed, 0x70776572ull);
  std::vector<double> v(cols);
  rng.fill_normal(v);
  auto normalize = [](std::vector<double>& x) {
    double n = 0.0;
    for (double e : x) n += e * e;
    n = std::sqrt(n);
    if (n > 0.0) {
      for (double& e : x) e /= n;
    }
    return n;
  };
  normalize(v);
  std::vector<double> u(rows);
  SingularTriplet t;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t r = 0; r < rows; ++r) u[r] = dot(m.data() + r * cols, v.data(), cols);
    const double su = normalize(u);
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* mr = m.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) v[c] += u[r] * mr[c];
    }
    const double sv = normalize(v);
    t.iterations = it;
    if (su == 0.0 || sv == 0.0) {
      t.value = 0.0;
      break;
    }
    t.value = sv;
    if (std::abs(sv - prev) <= tol * sv) break;
    prev = sv;
  }
  // u = m v / |m v| for the final v.
  for (std::size_t r = 0; r < rows; ++r) u[r] = dot(m.data() + r * cols, v.data(), cols);
  t.value = normalize(u);
  t.left = std::move(u);
  t.right = std::move(v);
  return t;
}

DenseMatrix qr_r_factor(const DenseMatrix& m) {
  if (m.rows() < m.cols()) throw DomainError("qr_r_factor: requires rows >= cols");
  require_finite(m, "qr_r_factor");
  const std::size_t n = m.rows();
  const std::size_t k = m.cols();
  // Work column-major: row j of w is column j of m.
  DenseMatrix w = m.transpose();
  std::vector<double> h(n);
  for (std::size_t j = 0; j < k; ++j) {
    double* col = w.data() + j * n;
    double norm = 0.0;
    for (std::size_t r = j; r < n; ++r) norm += col[r] * col[r];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = col[j] > 0.0 ? -norm : norm;
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t r = j; r < n; ++r) h[r] = col[r];
    h[j] -= alpha;
    double hh = 0.0;
    for (std::size_t r = j; r < n; ++r) hh += h[r] * h[r];
    if (hh == 0.0) continue;
    for (std::size_t jj = j; jj < k; ++jj) {
      double* c = w.data() + jj * n;
      double s = 0.0;
      for (std::size_t r = j; r < n; ++r) s += h[r] * c[r];
      s = 2.0 * s / hh;
      for (std::size_t r = j; r < n; ++r) c[r] -= s * h[r];
    }
  }
  DenseMatrix r(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) r(i, j) = w(j, i);
  }
  return r;
}

std::vector<double> product_singular_values(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw DomainError("product_singular_values: shape mismatch");
  if (a.rows() < a.cols()) return singular_values(matmul_nt(a, b));
  return singular_values(matmul_nt(qr_r_factor(a), qr_r_factor(b)));
}

}  // namespace muonlab
