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

#include <iosfwd>
#include <string>
#include <vector>

#include "muonlab/config.hpp"
#include "muonlab/rmt.hpp"

namespace muonlab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitVerificationFailed = 1, kExitError = 2 };

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

struct PolyVerification {
  AmplificationReport amplification;
  FloorReport floor;
  double floor_at_003 = 0.0;  // rho^(5)(0.03)
  InvarianceReport invariance;
  std::vector<double> critical_points;
  std::vector<double> critical_values;
  bool has_robustness = false;
  RobustnessReport robustness;
  PerturbationReport perturbation;  // at the configured radius
  std::vector<CheckResult> checks;

  bool passed() const;
};

PolyVerification verify_poly(const PolyOptions& opts);

struct RmtVerification {
  ConcentrationReport concentration;
  std::vector<std::vector<ConcentrationReport>> dispersion;  // [repeat][dim]
  std::vector<AngleReport> angles_by_lambda;
  std::vector<AngleReport> angles_by_dim;
  EnergyReport energy;
  std::vector<CheckResult> checks;

  bool passed() const;
};

RmtVerification verify_rmt(const RmtOptions& opts, std::uint64_t seed);

// Runs the experiment, writes its artifacts plus manifest.json and
// config.txt into cfg.output_dir, and returns an ExitCode. Progress and
// tables go to `log`.
int run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace muonlab
