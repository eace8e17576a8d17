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

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "muonlab/dense_matrix.hpp"
#include "muonlab/factorization.hpp"

namespace muonlab {

struct ProbeConfig {
  std::size_t grid_points = 41;  // odd
  double scale_range = 1.0;
  // 0-based index of the bulk singular vector; negative selects
  // min(499, min(m, n) - 1).
  long bulk_index = -1;
  std::size_t svd_batches = 50;
  std::size_t eval_batches = 10;

  void validate() const;
  std::size_t resolve_bulk_index(std::size_t rows, std::size_t cols) const;
};

struct Directions {
  DenseMatrix alpha;  // u_0 v_0^T
  DenseMatrix beta;   // u_k v_k^T
  double sigma_alpha = 0.0;
  double sigma_beta = 0.0;
};

// Throws DomainError when k = 0, k >= min(m, n) or sigma_k < 1e-14.
Directions extract_directions(const DenseMatrix& g_exact, std::size_t k);

struct LossSurface {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> losses;  // row-major: index = i_alpha * n + i_beta; NaN if missing
  double spike_range = 0.0;    // max - min over alpha at beta = 0
  double center_loss = 0.0;
  std::size_t missing = 0;

  double at(std::size_t ia, std::size_t ib) const { return losses[ia * betas.size() + ib]; }
};

using LossEval = std::function<double(const DenseMatrix&)>;

// Evaluates loss_eval(center + alpha d_alpha + beta d_beta) on the square
// grid. loss_eval must be thread-safe; a throwing or non-finite evaluation is
// stored as NaN. Frozen evaluation data belongs in the closure.
LossSurface grid_scan(const LossEval& loss_eval, const DenseMatrix& center,
                      const DenseMatrix& d_alpha, const DenseMatrix& d_beta,
                      const ProbeConfig& cfg);

struct ProbeResult {
  std::size_t step = 0;
  LossSurface surface;
  double effective_rank = 0.0;  // of factor A
  double normalized_entropy = 0.0;
};

// Probes factor A of `run` at its current state: the gradient of A averaged
// over svd_batches probe batches gives the directions, eval_batches further
// probe batches are frozen for the scan. Training state is not touched.
ProbeResult probe_factor(const FactorizationRun& run, const ProbeConfig& cfg);

// Advances `run` to each checkpoint (ascending, within the horizon) and
// probes there.
std::vector<ProbeResult> probe_at_checkpoints(FactorizationRun& run,
                                              const std::vector<std::size_t>& checkpoints,
                                              const ProbeConfig& cfg);

void write_surface_csv(std::ostream& out, const LossSurface& s);

}  // namespace muonlab
