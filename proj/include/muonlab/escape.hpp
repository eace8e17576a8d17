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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muonlab/landscape.hpp"
#include "muonlab/optimizers.hpp"

namespace muonlab {

enum class OptimizerKind { muon, adamw };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::muon;
  MuonConfig muon;
  AdamConfig adamw;
};

struct TrialOptions {
  std::size_t max_steps = 50000;
  // Records sigma_1(X0) per Muon step and derives lock_step from it.
  bool track_lock = false;
  double lock_threshold = 0.5;
};

struct TrialRecord {
  OptimizerKind optimizer = OptimizerKind::muon;
  SaddleConfig cfg;
  std::uint64_t seed = 0;
  bool escaped = false;
  std::size_t steps = 0;  // first t with |W_t|_F >= r0, else max_steps
  double final_distance = 0.0;
  std::optional<std::size_t> lock_step;
  double wall_time_ms = 0.0;
  std::string error;  // non-empty when the trial aborted
};

// Starts at W0 = W* = 0. The gradient at step t is drawn from the substream
// t of Rng(seed), so a trial depends only on (cfg, optimizer, seed).
TrialRecord run_trial(const SaddleConfig& cfg, const OptimizerSpec& opt,
                      const TrialOptions& options, std::uint64_t seed);

// First 1-based step whose value reaches the threshold.
std::optional<std::size_t> detect_lock(std::span<const double> normalized_top_sv,
                                       double threshold = 0.5);

struct SweepGrid {
  std::vector<std::size_t> dims{64, 128, 256, 512, 1024};
  std::vector<double> lambdas{1e-6};
  std::vector<double> kappas{1e2};
  std::vector<OptimizerSpec> optimizers{OptimizerSpec{}};
  std::vector<NoiseMode> noise_modes{NoiseMode::standard};
  std::size_t trials_per_cell = 30;
  std::uint64_t master_seed = 0;
  SaddleConfig base;  // sigma_ortho, r0 and heavy-tail parameters
  TrialOptions options;
};

struct SweepReport {
  OptimizerKind optimizer = OptimizerKind::muon;
  std::size_t dim = 0;
  double lambda = 0.0;
  double kappa = 0.0;
  NoiseMode noise_mode = NoiseMode::standard;
  std::size_t n_trials = 0;
  double mean_steps = 0.0;  // budget-censored trials count as max_steps
  double std_steps = 0.0;   // sample standard deviation
  double ci95_half_width = 0.0;
  double escape_fraction = 0.0;
  std::size_t failed_trials = 0;
};

struct SweepResult {
  std::vector<SweepReport> reports;
  std::vector<TrialRecord> trials;
};

// Seed of trial k in a cell; identical across optimizers and noise modes so
// cells that differ only in those are matched.
std::uint64_t trial_seed(std::uint64_t master, std::size_t dim, double lambda, double kappa,
                         std::size_t trial);

SweepReport aggregate(std::span<const TrialRecord> trials);

// Cells in grid order (dims, lambdas, kappas, optimizers, noise modes); trials
// run in parallel and are returned in the same order.
SweepResult run_sweep(const SweepGrid& grid);

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);
void write_reports_csv(std::ostream& out, std::span<const SweepReport> reports);

}  // namespace muonlab
