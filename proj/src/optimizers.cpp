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

#include "muonlab/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "muonlab/errors.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {
namespace {

void check_step_inputs(const DenseMatrix& w, const DenseMatrix& g, const DenseMatrix& state,
                       double lr_scale, const char* op) {
  if (!w.same_shape(g) || !w.same_shape(state)) {
    throw DomainError(std::string(op) + ": weight, gradient and state shapes differ");
  }
  if (!g.all_finite()) throw InvalidInputError(std::string(op) + ": non-finite gradient");
  if (!(lr_scale > 0.0 && lr_scale <= 1.0)) {
    throw DomainError(std::string(op) + ": lr_scale must lie in (0, 1]");
  }
}

}  // namespace

void MuonConfig::validate() const {
  if (!(eta > 0.0)) throw DomainError("muon: eta must be positive");
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("muon: mu must lie in (0, 1)");
  if (ns_steps < 1) throw DomainError("muon: ns_steps must be >= 1");
  if (!(norm_guard > 0.0)) throw DomainError("muon: norm_guard must be positive");
  if (!(weight_decay >= 0.0)) throw DomainError("muon: weight_decay must be non-negative");
  if (!(update_scale > 0.0)) throw DomainError("muon: update_scale must be positive");
}

MuonState::MuonState(const MuonConfig& cfg, std::size_t rows, std::size_t cols)
    : config(cfg), momentum(rows, cols) {
  config.validate();
}

MuonDiagnostics muon_step(DenseMatrix& w, const DenseMatrix& g, MuonState& state,
                          double lr_scale, bool want_top_sv) {
  check_step_inputs(w, g, state.momentum, lr_scale, "muon_step");
  const MuonConfig& c = state.config;
  state.momentum *= c.mu;
  state.momentum += g;

  MuonDiagnostics diag;
  diag.momentum_norm = frobenius_norm(state.momentum);
  DenseMatrix x0 = state.momentum * (1.0 / (diag.momentum_norm + c.norm_guard));
  if (want_top_sv) {
    diag.normalized_top_sv =
        diag.momentum_norm == 0.0 ? 0.0 : top_singular_triplet(x0, 0, 2000, 1e-10).value;
  }
  const double lr = lr_scale * c.eta;
  if (c.weight_decay != 0.0) w *= 1.0 - lr * c.weight_decay;
  if (diag.momentum_norm == 0.0) return diag;

  const DenseMatrix x = newton_schulz(x0, c.coeffs, c.ns_steps);
  const double dim = static_cast<double>(std::max(w.rows(), w.cols()));
  w.axpy(-c.update_scale * lr * std::sqrt(dim), x);
  return diag;
}

void AdamConfig::validate() const {
  if (!(eta > 0.0)) throw DomainError("adamw: eta must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw DomainError("adamw: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw DomainError("adamw: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("adamw: epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw DomainError("adamw: weight_decay must be non-negative");
}

AdamState::AdamState(const AdamConfig& cfg, std::size_t rows, std::size_t cols)
    : config(cfg), first_moment(rows, cols), second_moment(rows, cols) {
  config.validate();
}

void adamw_step(DenseMatrix& w, const DenseMatrix& g, AdamState& state, double lr_scale) {
  check_step_inputs(w, g, state.first_moment, lr_scale, "adamw_step");
  const AdamConfig& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double lr = lr_scale * c.eta;
  const double decay = 1.0 - lr * c.weight_decay;

  double* wp = w.data();
  double* mp = state.first_moment.data();
  double* vp = state.second_moment.data();
  const double* gp = g.data();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.size());
#pragma omp parallel for schedule(static) if (n >= 16384)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    mp[i] = c.beta1 * mp[i] + (1.0 - c.beta1) * gp[i];
    vp[i] = c.beta2 * vp[i] + (1.0 - c.beta2) * gp[i] * gp[i];
    const double m_hat = mp[i] / bc1;
    const double v_hat = vp[i] / bc2;
    wp[i] = wp[i] * decay - lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void LrSchedule::validate() const {
  if (total_steps == 0) throw DomainError("schedule: total_steps must be positive");
  if (!(hold_fraction >= 0.0 && hold_fraction <= 1.0)) {
    throw DomainError("schedule: hold_fraction must lie in [0, 1]");
  }
  if (!(floor_fraction > 0.0 && floor_fraction <= 1.0)) {
    throw DomainError("schedule: floor_fraction must lie in (0, 1]");
  }
}

double lr_at(const LrSchedule& s, std::size_t step) {
  if (s.kind == ScheduleKind::constant) return 1.0;
  const double total = static_cast<double>(s.total_steps);
  const double hold = std::floor(s.hold_fraction * total);
  const double t = static_cast<double>(step);
  if (t < hold) return 1.0;
  const double tail = total - 1.0 - hold;
  if (tail <= 0.0) return t >= total - 1.0 && hold < total ? s.floor_fraction : 1.0;
  const double progress = std::min(1.0, (t - hold) / tail);
  return s.floor_fraction +
         (1.0 - s.floor_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::constant ? "constant" : "cosine-tail";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "cosine-tail" || name == "cosine") return ScheduleKind::cosine_tail;
  throw DomainError("unknown schedule kind '" + name + "'");
}

}  // namespace muonlab
