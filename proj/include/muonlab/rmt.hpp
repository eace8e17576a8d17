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
#include <cstdint>
#include <string>
#include <vector>

#include "muonlab/dense_matrix.hpp"

namespace muonlab {

enum class RmtNoise {
  gaussian,   // i.i.d. N(0, 1)
  student_t,  // i.i.d. Student-t(3) rescaled to unit variance
  ones,       // deterministic all-ones matrix
};

std::string to_string(RmtNoise noise);
RmtNoise rmt_noise_from_string(const std::string& name);

struct ConcentrationReport {
  std::size_t dim = 0;  // d; D = d^2
  std::size_t n_samples = 0;
  double mean_ct = 0.0;
  double std_ct = 0.0;
  double min_ct = 0.0;
  double max_ct = 0.0;
};

// C = sqrt(D) / |Xi|_F for d x d unit-variance noise Xi.
double scaling_constant(const DenseMatrix& xi);

ConcentrationReport concentration_experiment(std::size_t d, std::size_t n_samples,
                                             RmtNoise noise, std::uint64_t seed);

struct AngleReport {
  double lambda_s = 0.0;
  double noise_scale = 0.0;  // entry standard deviation of E
  std::size_t dim = 0;
  std::size_t trials = 0;
  double mean_sin_angle = 0.0;
  double std_sin_angle = 0.0;
};

// S = lambda_s u v^T with random unit u, v; E has entry variance 1/d. Records
// sin of the angle between u and the top left singular vector of S + E.
AngleReport subspace_angle_experiment(double lambda_s, std::size_t d, std::size_t trials,
                                      std::uint64_t seed);

struct EnergyRow {
  std::size_t dim = 0;
  double total_dim = 0.0;  // D = d^2
  double mean_energy = 0.0;
  double mean_projected = 0.0;  // mean of Xi(0,0)^2
};

struct EnergyReport {
  std::vector<EnergyRow> rows;
  double slope = 0.0;  // least-squares slope of log energy on log D
};

EnergyReport energy_scaling_experiment(const std::vector<std::size_t>& dims,
                                       std::size_t samples, std::uint64_t seed);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace muonlab
