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
#include <optional>
#include <string>

#include "muonlab/dense_matrix.hpp"
#include "muonlab/polynomial.hpp"

namespace muonlab {

struct MuonConfig {
  double eta = 0.02;
  double mu = 0.95;
  PolyCoeffs coeffs;
  int ns_steps = 5;
  double norm_guard = 1e-12;
  double weight_decay = 0.0;
  double update_scale = 0.2;

  void validate() const;
};

struct MuonState {
  MuonConfig config;
  DenseMatrix momentum;

  MuonState() = default;
  MuonState(const MuonConfig& cfg, std::size_t rows, std::size_t cols);
};

struct MuonDiagnostics {
  double momentum_norm = 0.0;
  // sigma_1(X0) = sigma_1(B) / (|B|_F + guard); filled when requested.
  std::optional<double> normalized_top_sv;
};

// One step of momentum-orthogonalized descent:
//   B <- mu B + G
//   X0 <- B / (|B|_F + guard), X <- newton_schulz(X0)
//   W <- W (1 - s eta wd) - update_scale s eta sqrt(max(m, n)) X
// with s = lr_scale in (0, 1]. Throws InvalidInputError on a non-finite
// gradient and DomainError on shape mismatch.
MuonDiagnostics muon_step(DenseMatrix& w, const DenseMatrix& g, MuonState& state,
                          double lr_scale = 1.0, bool want_top_sv = false);

struct AdamConfig {
  double eta = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

struct AdamState {
  AdamConfig config;
  DenseMatrix first_moment;
  DenseMatrix second_moment;
  std::size_t step_count = 0;

  AdamState() = default;
  AdamState(const AdamConfig& cfg, std::size_t rows, std::size_t cols);
};

// Bias-corrected AdamW with decoupled weight decay.
void adamw_step(DenseMatrix& w, const DenseMatrix& g, AdamState& state, double lr_scale = 1.0);

enum class ScheduleKind { constant, cosine_tail };

struct LrSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  std::size_t total_steps = 1;
  double hold_fraction = 0.9;
  double floor_fraction = 0.01;

  void validate() const;
};

// Multiplier in (0, 1]: 1 during the hold, then cosine from 1 to the floor.
// Steps at or past total_steps return the floor.
double lr_at(const LrSchedule& schedule, std::size_t step);

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

}  // namespace muonlab
