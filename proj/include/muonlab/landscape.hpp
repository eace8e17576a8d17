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
#include <string>
#include <vector>

#include "muonlab/dense_matrix.hpp"
#include "muonlab/rng.hpp"

namespace muonlab {

enum class NoiseMode { standard, isotropic, heavy_tail };

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& name);

// d x d saddle at W* = 0 with a single negative-curvature coordinate (0, 0).
struct SaddleConfig {
  std::size_t dim = 256;
  double lambda = 1e-6;
  double kappa = 1e2;
  double sigma_ortho = 0.01;  // eps0 = sigma_ortho^2
  double r0 = 1.0;
  NoiseMode noise_mode = NoiseMode::standard;
  double heavy_tail_alpha = 1.5;
  double heavy_tail_df = 3.0;
  std::uint64_t seed = 0;

  double eps0() const { return sigma_ortho * sigma_ortho; }
  // Throws DomainError naming the offending field.
  void validate() const;
};

// Sigma*(0,0) = kappa eps0 + eps0, every other entry eps0.
DenseMatrix variance_matrix(const SaddleConfig& cfg);

// Standard mode: sqrt(Sigma*) (.) Z - lambda w(0,0) E_00 with Z i.i.d. N(0,1).
DenseMatrix gen_gradient(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng);

// Isotropic: Gaussian background rescaled to Frobenius norm sigma_ortho d,
// plus the spike and drift at (0, 0).
// Heavy tail: background variance proportional to (1 + i)^-alpha over the
// row-major flattened index i, normalized to mean eps0, entries drawn as
// unit-variance Student-t; the (0, 0) entry keeps variance (kappa + 1) eps0.
// Throws DomainError for standard mode or df <= 2.
DenseMatrix gen_gradient_ablation(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng);

// Background variances of heavy-tail mode, row-major, mean eps0.
std::vector<double> heavy_tail_variances(const SaddleConfig& cfg);

// Dispatches on cfg.noise_mode.
DenseMatrix saddle_gradient(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng);

}  // namespace muonlab
