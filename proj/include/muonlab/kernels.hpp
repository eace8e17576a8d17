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

#include "muonlab/dense_matrix.hpp"

// Matrix products. The OpenMP kernels in `muonlab` partition output rows
// across threads and accumulate every output entry in ascending inner-index
// order, so they agree bit-for-bit with the serial kernels in
// `muonlab::reference` for any thread count.
//
// Zero entries of the left operand are skipped; masked streaming inputs in
// the factorization task are mostly zeros.
namespace muonlab {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);     // a * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);  // a^T * b
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);  // a * b^T

// Sets the thread count used by library kernels; n <= 0 selects all cores.
// Returns the effective count.
int set_num_threads(int n);
int num_threads();

namespace reference {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace reference
}  // namespace muonlab
