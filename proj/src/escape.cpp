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

#include "muonlab/escape.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <ostream>

#include "muonlab/errors.hpp"
#include "muonlab/report.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::muon ? "muon" : "adamw"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "muon") return OptimizerKind::muon;
  if (name == "adamw" || name == "adam") return OptimizerKind::adamw;
  throw DomainError("unknown optimizer '" + name + "'");
}

std::optional<std::size_t> detect_lock(std::span<const double> normalized_top_sv,
                                       double threshold) {
  for (std::size_t i = 0; i < normalized_top_sv.size(); ++i) {
    if (normalized_top_sv[i] >= threshold) return i + 1;
  }
  return std::nullopt;
}

TrialRecord run_trial(const SaddleConfig& cfg, const OptimizerSpec& opt,
                      const TrialOptions& options, std::uint64_t seed) {
  if (options.max_steps == 0) throw DomainError("run_trial: max_steps must be >= 1");
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.optimizer = opt.kind;
  rec.cfg = cfg;
  rec.cfg.seed = seed;
  rec.seed = seed;
  rec.steps = options.max_steps;

  const Rng trial_rng(seed);
  DenseMatrix w(cfg.dim, cfg.dim);
  std::vector<double> top_sv;
  try {
    MuonState muon;
    AdamState adam;
    if (opt.kind == OptimizerKind::muon) {
      muon = MuonState(opt.muon, cfg.dim, cfg.dim);
    } else {
      adam = AdamState(opt.adamw, cfg.dim, cfg.dim);
    }
    for (std::size_t t = 1; t <= options.max_steps; ++t) {
      Rng step_rng = trial_rng.substream(t);
      const DenseMatrix g = saddle_gradient(w, cfg, step_rng);
      if (opt.kind == OptimizerKind::muon) {
        const auto diag = muon_step(w, g, muon, 1.0, options.track_lock);
        if (diag.normalized_top_sv) top_sv.push_back(*diag.normalized_top_sv);
      } else {
        adamw_step(w, g, adam, 1.0);
      }
      rec.final_distance = frobenius_norm(w);
      if (rec.final_distance >= cfg.r0) {
        rec.escaped = true;
        rec.steps = t;
        break;
      }
    }
  } catch (const Error& e) {
    rec.error = e.what();
  }
  if (options.track_lock) rec.lock_step = detect_lock(top_sv, options.lock_threshold);
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t dim, double lambda, double kappa,
                         std::size_t trial) {
  return derive_seed({master, dim, std::bit_cast<std::uint64_t>(lambda),
                      std::bit_cast<std::uint64_t>(kappa), trial});
}

SweepReport aggregate(std::span<const TrialRecord> trials) {
  SweepReport r;
  if (trials.empty()) return r;
  const TrialRecord& first = trials.front();
  r.optimizer = first.optimizer;
  r.dim = first.cfg.dim;
  r.lambda = first.cfg.lambda;
  r.kappa = first.cfg.kappa;
  r.noise_mode = first.cfg.noise_mode;
  double sum = 0.0;
  std::size_t escaped = 0;
  std::vector<double> steps;
  for (const auto& t : trials) {
    if (!t.error.empty()) {
      ++r.failed_trials;
      continue;
    }
    steps.push_back(static_cast<double>(t.steps));
    sum += static_cast<double>(t.steps);
    if (t.escaped) ++escaped;
  }
  r.n_trials = steps.size();
  if (r.n_trials == 0) return r;
  const double n = static_cast<double>(r.n_trials);
  r.mean_steps = sum / n;
  if (r.n_trials >= 2) {
    double ss = 0.0;
    for (double s : steps) ss += (s - r.mean_steps) * (s - r.mean_steps);
    r.std_steps = std::sqrt(ss / (n - 1.0));
    r.ci95_half_width = 1.96 * r.std_steps / std::sqrt(n);
  }
  r.escape_fraction = static_cast<double>(escaped) / n;
  return r;
}

SweepResult run_sweep(const SweepGrid& grid) {
  if (grid.trials_per_cell == 0) throw DomainError("run_sweep: trials_per_cell must be >= 1");
  struct Cell {
    SaddleConfig cfg;
    OptimizerSpec opt;
  };
  std::vector<Cell> cells;
  for (std::size_t d : grid.dims) {
    for (double lambda : grid.lambdas) {
      for (double kappa : grid.kappas) {
        for (const auto& opt : grid.optimizers) {
          for (NoiseMode mode : grid.noise_modes) {
            SaddleConfig cfg = grid.base;
            cfg.dim = d;
            cfg.lambda = lambda;
            cfg.kappa = kappa;
            cfg.noise_mode = mode;
            cfg.validate();
            cells.push_back({cfg, opt});
          }
        }
      }
    }
  }
  const std::size_t per = grid.trials_per_cell;
  SweepResult result;
  result.trials.resize(cells.size() * per);
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(result.trials.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const Cell& cell = cells[static_cast<std::size_t>(i) / per];
    const std::size_t k = static_cast<std::size_t>(i) % per;
    const std::uint64_t seed =
        trial_seed(grid.master_seed, cell.cfg.dim, cell.cfg.lambda, cell.cfg.kappa, k);
    result.trials[static_cast<std::size_t>(i)] = run_trial(cell.cfg, cell.opt, grid.options, seed);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    result.reports.push_back(
        aggregate(std::span<const TrialRecord>(result.trials).subspan(c * per, per)));
  }
  return result;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  CsvWriter w(out, {"optimizer", "d", "lambda", "kappa", "noise_mode", "seed", "escaped", "steps",
                    "final_distance", "lock_step"});
  for (const auto& t : trials) {
    w.row({to_string(t.optimizer), std::to_string(t.cfg.dim), format_real(t.cfg.lambda),
           format_real(t.cfg.kappa), to_string(t.cfg.noise_mode), std::to_string(t.seed),
           t.escaped ? "1" : "0", std::to_string(t.steps), format_real(t.final_distance),
           t.lock_step ? std::to_string(*t.lock_step) : ""});
  }
}

void write_reports_csv(std::ostream& out, std::span<const SweepReport> reports) {
  CsvWriter w(out, {"optimizer", "d", "lambda", "kappa", "noise_mode", "n_trials", "mean_steps",
                    "std_steps", "ci95_half_width", "escape_fraction", "failed_trials"});
  for (const auto& r : reports) {
    w.row({to_string(r.optimizer), std::to_string(r.dim), format_real(r.lambda),
           format_real(r.kappa), to_string(r.noise_mode), std::to_string(r.n_trials),
           format_real(r.mean_steps), format_real(r.std_steps), format_real(r.ci95_half_width),
           format_real(r.escape_fraction), std::to_string(r.failed_trials)});
  }
}

}  // namespace muonlab
