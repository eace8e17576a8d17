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


#include "doctest.h"

#include <cmath>

#include "muonlab/errors.hpp"
#include "muonlab/kernels.hpp"
#include "muonlab/spectral.hpp"
#include "oracles.hpp"

using doctest::Approx;
using muonlab::DenseMatrix;

namespace {

double max_gram_defect(const DenseMatrix& q) {
  const DenseMatrix g = oracle::matmul(q.transpose(), q);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

void check_svd_invariants(const DenseMatrix& m) {
  const auto f = muonlab::thin_svd(m);
  const std::size_t k = std::min(m.rows(), m.cols());
  REQUIRE(f.singular_values.size() == k);
  REQUIRE(f.left_vectors.rows() == m.rows());
  REQUIRE(f.left_vectors.cols() == k);
  REQUIRE(f.right_vectors.rows() == m.cols());
  REQUIRE(f.right_vectors.cols() == k);
  CHECK(max_gram_defect(f.left_vectors) <= 1e-10);
  CHECK(max_gram_defect(f.right_vectors) <= 1e-10);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(f.singular_values[i] >= 0.0);
    if (i > 0) CHECK(f.singular_values[i] <= f.singular_values[i - 1]);
  }
  if (oracle::frobenius(m) == 0.0) {
    CHECK(oracle::frobenius(f.reconstruct()) == 0.0);
  } else {
    CHECK(oracle::rel_frobenius(f.reconstruct(), m) <= 1e-10);
  }
  // Sign convention: the largest-magnitude entry of each left vector is positive.
  for (std::size_t j = 0; j < k; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (std::abs(f.left_vectors(i, j)) > std::abs(best)) best = f.left_vectors(i, j);
    CHECK(best > 0.0);
  }
  // The Gram-matrix oracle resolves singular values only to about
  // sqrt(eps) * sigma_1.
  const auto want = oracle::singular_values(m);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(std::abs(f.singular_values[i] - want[i]) <= 1e-7 * std::max(want[0], 1e-300));
  }
}

DenseMatrix unit_frobenius(DenseMatrix m) {
  m *= 1.0 / oracle::frobenius(m);
  return m;
}

}  // namespace

TEST_CASE("frobenius norm examples") {
  CHECK(muonlab::frobenius_norm(DenseMatrix(2, 2)) == 0.0);
  CHECK(muonlab::frobenius_norm(DenseMatrix::identity(2)) == Approx(std::sqrt(2.0)));
  CHECK(muonlab::frobenius_norm(DenseMatrix{{3, 4}, {0, 0}}) == 5.0);
  CHECK(muonlab::frobenius_inner(DenseMatrix{{1, 2}}, DenseMatrix{{3, -1}}) == 1.0);
}

TEST_CASE("svd of a diagonal matrix") {
  const auto f = muonlab::thin_svd(DenseMatrix{{3, 0}, {0, 1}});
  CHECK(f.singular_values[0] == Approx(3.0));
  CHECK(f.singular_values[1] == Approx(1.0));
  CHECK(std::abs(f.left_vectors(0, 0)) == Approx(1.0));
  CHECK(std::abs(f.right_vectors(1, 1)) == Approx(1.0));
}

TEST_CASE("svd of a rank-1 matrix") {
  const std::vector<double> u{0.6, 0.8}, v{0.0, 1.0};
  const auto f = muonlab::thin_svd(2.0 * DenseMatrix::outer(u, v));
  CHECK(f.singular_values[0] == Approx(2.0));
  CHECK(std::abs(f.singular_values[1]) <= 1e-14);
  CHECK(max_gram_defect(f.left_vectors) <= 1e-10);
}

TEST_CASE("svd invariants on random shapes") {
  std::uint64_t seed = 100;
  for (auto [m, n] : {std::pair{8, 5}, {5, 8}, {1, 6}, {6, 1}, {1, 1}, {30, 30}, {64, 17}}) {
    CAPTURE(m);
    CAPTURE(n);
    check_svd_invariants(oracle::gaussian(m, n, seed++));
  }
}

TEST_CASE("svd of rank-deficient and graded matrices") {
  DenseMatrix low = oracle::matmul(oracle::gaussian(12, 3, 1), oracle::gaussian(3, 9, 2));
  const auto f = muonlab::thin_svd(low);
  for (std::size_t i = 3; i < 9; ++i) CHECK(f.singular_values[i] <= 1e-12 * f.singular_values[0]);
  CHECK(max_gram_defect(f.left_vectors) <= 1e-10);
  CHECK(oracle::rel_frobenius(f.reconstruct(), low) <= 1e-10);
  DenseMatrix graded = oracle::gaussian(10, 10, 3);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) graded(i, j) *= std::pow(10.0, -static_cast<double>(j));
  check_svd_invariants(graded);
  check_svd_invariants(DenseMatrix(4, 3));
}

TEST_CASE("operator norm") {
  CHECK(muonlab::operator_norm(DenseMatrix(3, 2)) == 0.0);
  CHECK(muonlab::operator_norm(DenseMatrix{{3, 0}, {0, 1}}) == Approx(3.0));
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DenseMatrix m = oracle::gaussian(3 + s % 7, 2 + s % 5, 500 + s);
    CHECK(muonlab::operator_norm(m) <= muonlab::frobenius_norm(m) * (1 + 1e-14));
  }
}

TEST_CASE("effective rank") {
  CHECK(muonlab::effective_rank(DenseMatrix::identity(7)).value == Approx(7.0));
  CHECK(muonlab::effective_rank(DenseMatrix::identity(7)).normalized_entropy == Approx(1.0));
  const std::vector<double> u{1, 2, 3}, v{1, -1};
  CHECK(muonlab::effective_rank(DenseMatrix::outer(u, v)).value == Approx(1.0));
  const std::vector<double> s{2, 1, 1};
  CHECK(muonlab::effective_rank_of_spectrum(s, 3).value == Approx(2.8284).epsilon(1e-4));
  CHECK(muonlab::effective_rank_of_spectrum(s, 3).value == Approx(oracle::effective_rank(s)));
  CHECK_THROWS_AS(muonlab::effective_rank(DenseMatrix(3, 3)), muonlab::DomainError);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DenseMatrix m = oracle::gaussian(4 + seed, 9, seed);
    const double r = muonlab::effective_rank(m).value;
    CHECK(r >= 1.0);
    CHECK(r <= std::min<double>(m.rows(), m.cols()) + 1e-12);
  }
}

TEST_CASE("newton-schulz fixed point and rank-1 oracle") {
  CHECK(muonlab::newton_schulz(DenseMatrix(4, 3)) == DenseMatrix(4, 3));
  const std::vector<double> u{0.48, 0.64, 0.6}, v{0.6, 0.8};
  const DenseMatrix x0 = DenseMatrix::outer(u, v);
  const DenseMatrix want = oracle::rho_k(1.0, 5) * x0;
  CHECK(oracle::rho_k(1.0, 5) == Approx(0.6964).epsilon(2e-4));
  CHECK(oracle::rel_frobenius(muonlab::newton_schulz(x0), want) <= 1e-12);
}

TEST_CASE("newton-schulz commutes with the svd") {
  std::uint64_t seed = 900;
  for (auto [m, n] : {std::pair{16, 8}, {8, 16}, {10, 10}, {3, 20}}) {
    const DenseMatrix x0 = unit_frobenius(oracle::gaussian(m, n, seed++));
    const auto f = muonlab::thin_svd(x0);
    std::vector<double> mapped(f.singular_values.size());
    for (std::size_t i = 0; i < mapped.size(); ++i) mapped[i] = oracle::rho_k(f.singular_values[i], 5);
    const DenseMatrix want = oracle::matmul(
        oracle::matmul(f.left_vectors, DenseMatrix::diagonal(mapped)), f.right_vectors.transpose());
    CHECK(oracle::rel_frobenius(muonlab::newton_schulz(x0), want) <= 1e-8);
    for (double s : f.singular_values) CHECK(s <= 1.0 + 1e-15);
  }
}

TEST_CASE("newton-schulz transpose equivariance and reference agreement") {
  const DenseMatrix x = unit_frobenius(oracle::gaussian(40, 25, 77));
  const DenseMatrix y = muonlab::newton_schulz(x);
  CHECK(muonlab::max_abs_diff(muonlab::newton_schulz(x.transpose()), y.transpose()) <= 1e-12);
  const int saved = muonlab::num_threads();
  for (int threads : {1, 3}) {
    muonlab::set_num_threads(threads);
    CHECK(muonlab::newton_schulz(x) == muonlab::newton_schulz_reference(x));
  }
  muonlab::set_num_threads(saved);
}

TEST_CASE("newton-schulz errors") {
  DenseMatrix big(3, 3, 1e60);
  try {
    muonlab::newton_schulz(big);
    FAIL("expected overflow");
  } catch (const muonlab::OverflowError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  DenseMatrix nan(2, 2);
  nan(0, 1) = std::nan("");
  CHECK_THROWS_AS(muonlab::newton_schulz(nan), muonlab::InvalidInputError);
}

TEST_CASE("top singular triplet matches the oracle") {
  const DenseMatrix m = oracle::gaussian(30, 20, 5);
  const auto t = muonlab::top_singular_triplet(m, 3);
  const auto want = oracle::singular_values(m);
  CHECK(t.value == Approx(want[0]).epsilon(1e-10));
  // m v = sigma u for the returned pair.
  double resid = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * t.right[j];
    resid = std::max(resid, std::abs(s - t.value * t.left[i]));
  }
  CHECK(resid <= 1e-5 * t.value);
  CHECK(muonlab::top_singular_triplet(m, 3).value == t.value);
}

TEST_CASE("householder R factor and product singular values") {
  const DenseMatrix a = oracle::gaussian(40, 6, 11);
  const DenseMatrix r = muonlab::qr_r_factor(a);
  REQUIRE(r.rows() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < i; ++j) CHECK(r(i, j) == 0.0);
  CHECK(oracle::rel_frobenius(oracle::matmul(r.transpose(), r), oracle::matmul(a.transpose(), a)) <=
        1e-12);
  const DenseMatrix b = oracle::gaussian(40, 6, 12);
  const auto got = muonlab::product_singular_values(a, b);
  const auto want = oracle::singular_values(oracle::matmul(a, b.transpose()));
  REQUIRE(got.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(got[i] == Approx(want[i]).epsilon(1e-9));
}
