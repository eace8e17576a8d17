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

#include "muonlab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <string>

#include "muonlab/errors.hpp"

namespace muonlab {
namespace {

constexpr std::size_t kInnerBlock = 128;

void check_inner(std::size_t lhs, std::size_t rhs, const char* op) {
  if (lhs != rhs) {
    throw DomainError(std::string(op) + ": inner dimensions differ (" + std::to_string(lhs) +
                      " vs " + std::to_string(rhs) + ")");
  }
}

// c[i, :] += sum_k a_row[k] * b[k, :] for k in [k0, k1).
inline void accumulate_row(const double* a_row, const DenseMatrix& b, std::size_t k0,
                           std::size_t k1, double* c_row) {
  const std::size_t n = b.cols();
  for (std::size_t k = k0; k < k1; ++k) {
    const double s = a_row[k];
    if (s == 0.0) continue;
    const double* b_row = b.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) c_row[j] += s * b_row[j];
  }
}

}  // namespace

int set_num_threads(int n) {
  if (n <= 0) n = omp_get_num_procs();
  omp_set_num_threads(n);
  return n;
}

int num_threads() { return omp_get_max_threads(); }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  const std::size_t m = a.rows();
  const std::size_t inner = a.cols();
  DenseMatrix c(m, b.cols());
  const bool parallel = m >= 16 && m * inner * b.cols() >= (1u << 16) && !omp_in_parallel();
  for (std::size_t k0 = 0; k0 < inner; k0 += kInnerBlock) {
    const std::size_t k1 = std::min(inner, k0 + kInnerBlock);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::size_t i = 0; i < m; ++i) {
      accumulate_row(a.data() + i * inner, b, k0, k1, c.data() + i * c.cols());
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  const std::size_t m = a.cols();
  const std::size_t inner = a.rows();
  const std::size_t n = b.cols();
  DenseMatrix c(m, n);
  const bool parallel = m >= 16 && m * inner * n >= (1u << 16) && !omp_in_parallel();
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t i = 0; i < m; ++i) {
    double* c_row = c.data() + i * n;
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = a(k, i);
      if (s == 0.0) continue;
      const double* b_row = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) c_row[j] += s * b_row[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  return matmul(a, b.transpose());
}

namespace reference {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.rows(), "reference::matmul");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.rows(), b.rows(), "reference::matmul_tn");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.cols(), "reference::matmul_nt");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      c(i, j) = acc;
    }
  }
  return c;
}

}  // namespace reference
}  // namespace muonlab
