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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "muonlab/dense_matrix.hpp"
#include "muonlab/polynomial.hpp"

namespace muonlab {

double frobenius_norm(const DenseMatrix& m);
double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b);

// m = U diag(s) V^T with U m x k, V n x k, k = min(m, n); s non-increasing.
// The largest-magnitude entry of every column of U is positive.
struct SvdFactors {
  DenseMatrix left_vectors;
  std::vector<double> singular_values;
  DenseMatrix right_vectors;

  DenseMatrix reconstruct() const;
};

// One-sided Jacobi. Throws DecompositionError when the sweep limit is hit.
SvdFactors thin_svd(const DenseMatrix& m);
std::vector<double> singular_values(const DenseMatrix& m);
double operator_norm(const DenseMatrix& m);

struct EffectiveRank {
  double value = 0.0;               // exp of the entropy of sigma_i / sum sigma
  double normalized_entropy = 0.0;  // entropy / ln(min(m, n)); 0 when min(m, n) = 1
};

// Throws DomainError for a zero matrix.
EffectiveRank effective_rank(const DenseMatrix& m);
EffectiveRank effective_rank_of_spectrum(std::span<const double> sigma, std::size_t min_dim);

// X_{k+1} = a X + b (X X^T) X + c (X X^T)^2 X. Runs on the transpose when
// rows > cols. Throws OverflowError naming the first non-finite step.
DenseMatrix newton_schulz(const DenseMatrix& x0, const PolyCoeffs& coeffs = {}, int steps = 5);

// Same iteration built only from reference kernels; test oracle.
DenseMatrix newton_schulz_reference(const DenseMatrix& x0, const PolyCoeffs& coeffs = {},
                                    int steps = 5);

struct SingularTriplet {
  double value = 0.0;
  std::vector<double> left;
  std::vector<double> right;
  int iterations = 0;
};

// Power iteration on m^T m from a seeded random start. Converges when the
// singular value estimate changes by less than tol relative.
SingularTriplet top_singular_triplet(const DenseMatrix& m, std::uint64_t seed = 0,
                                     int max_iter = 20000, double tol = 1e-13);

// R factor (k x k, upper triangular) of a thin Householder QR of m (rows >= cols).
DenseMatrix qr_r_factor(const DenseMatrix& m);

// Singular values of a b^T for a, b of shape n x k with n >= k, via thin QR of
// both factors; cost is O(n k^2) instead of an n x n decomposition.
std::vector<double> product_singular_values(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace muonlab
