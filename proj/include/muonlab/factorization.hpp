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
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "muonlab/dense_matrix.hpp"
#include "muonlab/escape.hpp"
#include "muonlab/optimizers.hpp"
#include "muonlab/rng.hpp"

namespace muonlab {

// Online factorization y = x W*^T fitted by x B A^T with A, B of shape d x R.
struct FactorizationConfig {
  std::size_t dim = 512;
  std::size_t rank = 64;
  double kappa = 1e5;
  double sigma_max = 10.0;
  std::size_t active_rank = 2;
  double active_var = 1e-4;
  double dormant_var = 1e-12;
  std::size_t batch = 64;
  double mask_decay = 0.05;
  std::size_t steps = 5000;
  // total_steps follows `steps` at run time.
  LrSchedule schedule{ScheduleKind::cosine_tail, 5000, 0.0, 0.01};
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Muon: eta 0.01, mu 0.95, wd 0. AdamW: eta 5e-4, wd 0.01.
OptimizerSpec default_factorization_optimizer(OptimizerKind kind);

// U diag(sigma) V^T with U, V from the SVD of a standard Gaussian d x d draw
// and sigma_i = sigma_max kappa^(-i/(d-1)).
DenseMatrix build_target(std::size_t d, double kappa, double sigma_max, Rng& rng);

struct Factors {
  DenseMatrix a;
  DenseMatrix b;
};

// Columns [0, active_rank) have variance active_var, the rest dormant_var.
Factors init_factors(const FactorizationConfig& cfg, Rng& rng);

struct Batch {
  DenseMatrix x;  // batch x d, masked
  DenseMatrix y;  // batch x d, y = x W*^T
};

// Column i of x survives with probability exp(-mask_decay i). `target_t` is
// W*^T.
Batch sample_batch(const FactorizationConfig& cfg, const DenseMatrix& target_t, Rng& rng);

struct LossGrads {
  double loss = 0.0;
  DenseMatrix grad_a;
  DenseMatrix grad_b;
};

// L = |x B A^T - y|_F^2 / (2 batch).
LossGrads loss_and_grads(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x,
                         const DenseMatrix& y);
double loss_only(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x,
                 const DenseMatrix& y);

struct TracePoint {
  std::size_t step = 0;
  double loss = 0.0;
  double effective_rank = 0.0;
  double sigma1 = 0.0;
};

struct RunTrace {
  OptimizerKind optimizer = OptimizerKind::muon;
  std::vector<TracePoint> points;
  bool diverged = false;
};

// One training trajectory. Target, initialization, training batches and
// probe draws use separate substreams of the run seed, so probing never
// perturbs training. The batch for step t comes from training substream t.
class FactorizationRun {
 public:
  FactorizationRun(const FactorizationConfig& cfg, const OptimizerSpec& opt);

  const FactorizationConfig& config() const { return cfg_; }
  const OptimizerSpec& optimizer() const { return opt_; }
  std::size_t step() const { return step_; }
  const DenseMatrix& target() const { return target_; }
  const DenseMatrix& a() const { return factors_.a; }
  const DenseMatrix& b() const { return factors_.b; }
  bool diverged() const { return diverged_; }

  // Loss at the current parameters on the batch of the current step.
  double current_loss() const;
  TracePoint observe() const;
  // Applies one optimizer step to both factors; returns the pre-step loss.
  double advance();

  Batch training_batch(std::size_t step) const;
  // Independent draw from the probe stream; `tag` selects the substream.
  Batch probe_batch(std::uint64_t tag) const;

 private:
  FactorizationConfig cfg_;
  OptimizerSpec opt_;
  Rng train_rng_;
  Rng probe_rng_;
  DenseMatrix target_;
  DenseMatrix target_t_;
  Factors factors_;
  MuonState muon_a_, muon_b_;
  AdamState adam_a_, adam_b_;
  std::size_t step_ = 0;
  bool diverged_ = false;
};

// Records every `record_every` steps and at the final step. Stops early when
// the loss exceeds 1e12 or turns non-finite.
RunTrace run_factorization(const FactorizationConfig& cfg, const OptimizerSpec& opt,
                           std::size_t record_every = 10);

void write_trace_csv(std::ostream& out, const RunTrace& trace);

}  // namespace muonlab
