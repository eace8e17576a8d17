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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "muonlab/escape.hpp"
#include "muonlab/factorization.hpp"
#include "muonlab/polynomial.hpp"
#include "muonlab/probe.hpp"

namespace muonlab {

enum class ExperimentKind { escape_sweep, matfac, probe, verify_poly, verify_rmt };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct PolyOptions {
  PolyCoeffs coeffs;
  double lo = 0.6;
  double hi = 1.205;
  std::size_t amplification_grid = 10000;
  std::size_t floor_grid = 100000;
  std::size_t samples = 64;
  double perturbation_radius = 0.024;
};

struct RmtOptions {
  std::size_t concentration_dim = 256;
  std::size_t concentration_samples = 1000;
  std::vector<std::size_t> dispersion_dims{64, 256};
  std::vector<double> angle_lambdas{2.0, 5.0, 10.0};
  std::vector<std::size_t> angle_dims{64, 256, 1024};
  std::size_t angle_trials = 20;
  std::vector<std::size_t> energy_dims{32, 64, 128, 256, 512};
  std::size_t energy_samples = 20;
};

// Every experiment kind reads the keys it needs; all keys are accepted for
// every kind so one file can drive several subcommands. Optimizer defaults
// depend on the kind (the factorization task uses its own learning rates).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::escape_sweep;
  std::uint64_t master_seed = 0;
  std::string output_dir = "results";
  int jobs = 0;  // 0: all cores

  std::vector<OptimizerKind> optimizers{OptimizerKind::muon};
  MuonConfig muon;
  AdamConfig adamw;

  SweepGrid sweep;  // optimizer specs are rebuilt by sweep_grid()
  FactorizationConfig matfac;
  std::size_t record_every = 10;
  ProbeConfig probe;
  OptimizerKind probe_optimizer = OptimizerKind::muon;
  std::vector<std::size_t> checkpoints{100, 5000};
  PolyOptions poly;
  RmtOptions rmt;

  SweepGrid sweep_grid() const;
  OptimizerSpec optimizer_spec(OptimizerKind kind) const;
  FactorizationConfig factorization() const;  // seed filled from master_seed

  // Throws ConfigError naming the offending key.
  void validate() const;
};

ExperimentConfig default_config(ExperimentKind kind);

// Sorted list of every accepted key.
std::vector<std::string> config_keys();

// Applies one key; throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

// Canonical "key = value" text, one line per key, sorted.
std::string serialize_config(const ExperimentConfig& cfg);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Key-value text: '#' comments, blank lines, "key = value". Section headers
// "[prefix]" prepend "prefix." to following keys.
KeyValues parse_key_values(const std::string& text);
// JSON object, nested objects flatten with '.', arrays become comma lists. A
// manifest (object with a "config" member) yields that member.
KeyValues parse_json_key_values(const std::string& text);
KeyValues load_config_file(const std::string& path);

struct ConfigSources {
  ExperimentKind kind = ExperimentKind::escape_sweep;
  std::optional<std::string> file;
  KeyValues overrides;                 // from command-line flags
  std::optional<std::string> env_seed;  // MUON_LAB_SEED
};

// Precedence: overrides > file > env_seed > defaults.
ExperimentConfig parse_config(const ConfigSources& sources);

}  // namespace muonlab
