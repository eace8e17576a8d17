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

#include "muonlab/factorization.hpp"

#include <cmath>
#include <ostream>

#include "muonlab/errors.hpp"
#include "muonlab/kernels.hpp"
#include "muonlab/report.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {
namespace {

constexpr double kDivergenceLoss = 1e12;

enum StreamId : std::uint64_t { kTarget = 0, kInit = 1, kTrain = 2, kProbe = 3 };

}  // namespace

void FactorizationConfig::validate() const {
  if (dim < 2) throw ConfigError("dim", "must be >= 2");
  if (rank == 0 || rank > dim) throw ConfigError("rank", "must lie in [1, dim]");
  if (active_rank == 0 || active_rank > rank) {
    throw ConfigError("active_rank", "must lie in [1, rank]");
  }
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("kappa", "must be >= 1");
  if (!(sigma_max > 0.0)) throw ConfigError("sigma_max", "must be positive");
  if (!(active_var > 0.0)) throw ConfigError("active_var", "must be positive");
  if (!(dormant_var > 0.0)) throw ConfigError("dormant_var", "must be positive");
  if (batch == 0) throw ConfigError("batch", "must be positive");
  if (!(mask_decay >= 0.0)) throw ConfigError("mask_decay", "must be non-negative");
  try {
    LrSchedule s = schedule;
    s.total_steps = steps == 0 ? 1 : steps;
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError("schedule", e.what());
  }
}

OptimizerSpec default_factorization_optimizer(OptimizerKind kind) {
  OptimizerSpec spec;
  spec.kind = kind;
  spec.muon.eta = 0.01;
  spec.muon.mu = 0.95;
  spec.muon.weight_decay = 0.0;
  spec.adamw.eta = 5e-4;
  spec.adamw.beta1 = 0.9;
  spec.adamw.beta2 = 0.999;
  spec.adamw.epsilon = 1e-8;
  spec.adamw.weight_decay = 0.01;
  return spec;
}

DenseMatrix build_target(std::size_t d, double kappa, double sigma_max, Rng& rng) {
  if (d < 2) throw DomainError("build_target: d must be >= 2");
  DenseMatrix gauss(d, d);
  rng.fill_normal(gauss.entries());
  const SvdFactors f = thin_svd(gauss);
  DenseMatrix scaled = f.left_vectors;
  for (std::size_t j = 0; j < d; ++j) {
    const double s =
        sigma_max * std::pow(kappa, -static_cast<double>(j) / static_cast<double>(d - 1));
    for (std::size_t r = 0; r < d; ++r) scaled(r, j) *= s;
  }
  return matmul_nt(scaled, f.right_vectors);
}

Factors init_factors(const FactorizationConfig& cfg, Rng& rng) {
  Factors f{DenseMatrix(cfg.dim, cfg.rank), DenseMatrix(cfg.dim, cfg.rank)};
  const double sa = std::sqrt(cfg.active_var);
  const double sd = std::sqrt(cfg.dormant_var);
  for (DenseMatrix* m : {&f.a, &f.b}) {
    rng.fill_normal(m->entries());
    for (std::size_t r = 0; r < cfg.dim; ++r) {
      for (std::size_t j = 0; j < cfg.rank; ++j) (*m)(r, j) *= j < cfg.active_rank ? sa : sd;
    }
  }
  return f;
}

Batch sample_batch(const FactorizationConfig& cfg, const DenseMatrix& target_t, Rng& rng) {
  DenseMatrix x(cfg.batch, cfg.dim);
  std::vector<double> survive(cfg.dim);
  for (std::size_t i = 0; i < cfg.dim; ++i) {
    survive[i] = std::exp(-cfg.mask_decay * static_cast<double>(i));
  }
  for (std::size_t r = 0; r < cfg.batch; ++r) {
    for (std::size_t i = 0; i < cfg.dim; ++i) {
      if (survive[i] >= 1.0 || rng.bernoulli(survive[i])) x(r, i) = rng.normal();
    }
  }
  DenseMatrix y = matmul(x, target_t);
  return {std::move(x), std::move(y)};
}

double loss_only(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x,
                 const DenseMatrix& y) {
  DenseMatrix r = matmul_nt(matmul(x, b), a);
  r -= y;
  const double n = frobenius_norm(r);
  return n * n / (2.0 * static_cast<double>(x.rows()));
}

LossGrads loss_and_grads(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x,
                         const DenseMatrix& y) {
  if (!a.same_shape(b) || x.cols() != a.rows() || !x.same_shape(y)) {
    throw DomainError("loss_and_grads: inconsistent shapes");
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  const DenseMatrix xb = matmul(x, b);
  DenseMatrix r = matmul_nt(xb, a);
  r -= y;
  LossGrads out;
  const double rn = frobenius_norm(r);
  out.loss = 0.5 * rn * rn * inv_n;
  out.grad_a = matmul_tn(r, xb) * inv_n;
  out.grad_b = matmul_tn(x, matmul(r, a)) * inv_n;
  return out;
}

FactorizationRun::FactorizationRun(const FactorizationConfig& cfg, const OptimizerSpec& opt)
    : cfg_(cfg), opt_(opt) {
  cfg_.validate();
  cfg_.schedule.total_steps = cfg_.steps == 0 ? 1 : cfg_.steps;
  const Rng root(cfg_.seed);
  Rng target_rng = root.substream(kTarget);
  Rng init_rng = root.substream(kInit);
  train_rng_ = root.substream(kTrain);
  probe_rng_ = root.substream(kProbe);
  target_ = build_target(cfg_.dim, cfg_.kappa, cfg_.sigma_max, target_rng);
  target_t_ = target_.transpose();
  factors_ = init_factors(cfg_, init_rng);
  if (opt_.kind == OptimizerKind::muon) {
    muon_a_ = MuonState(opt_.muon, cfg_.dim, cfg_.rank);
    muon_b_ = MuonState(opt_.muon, cfg_.dim, cfg_.rank);
  } else {
    adam_a_ = AdamState(opt_.adamw, cfg_.dim, cfg_.rank);
    adam_b_ = AdamState(opt_.adamw, cfg_.dim, cfg_.rank);
  }
}

Batch FactorizationRun::training_batch(std::size_t step) const {
  Rng rng = train_rng_.substream(step);
  return sample_batch(cfg_, target_t_, rng);
}

Batch FactorizationRun::probe_batch(std::uint64_t tag) const {
  Rng rng = probe_rng_.substream(tag);
  return sample_batch(cfg_, target_t_, rng);
}

double FactorizationRun::current_loss() const {
  const Batch b = training_batch(step_);
  return loss_only(factors_.a, factors_.b, b.x, b.y);
}

TracePoint FactorizationRun::observe() const {
  TracePoint p;
  p.step = step_;
  p.loss = current_loss();
  const std::vector<double> sv = product_singular_values(factors_.a, factors_.b);
  p.sigma1 = sv.front();
  p.effective_rank = p.sigma1 > 0.0 ? effective_rank_of_spectrum(sv, cfg_.dim).value : 0.0;
  return p;
}

double FactorizationRun::advance() {
  if (diverged_) throw DomainError("FactorizationRun: cannot advance a diverged run");
  const Batch batch = training_batch(step_);
  LossGrads lg = loss_and_grads(factors_.a, factors_.b, batch.x, batch.y);
  if (!std::isfinite(lg.loss) || lg.loss > kDivergenceLoss) {
    diverged_ = true;
    return lg.loss;
  }
  const double lr = lr_at(cfg_.schedule, step_);
  if (opt_.kind == OptimizerKind::muon) {
    muon_step(factors_.a, lg.grad_a, muon_a_, lr);
    muon_step(factors_.b, lg.grad_b, muon_b_, lr);
  } else {
    adamw_step(factors_.a, lg.grad_a, adam_a_, lr);
    adamw_step(factors_.b, lg.grad_b, adam_b_, lr);
  }
  ++step_;
  return lg.loss;
}

RunTrace run_factorization(const FactorizationConfig& cfg, const OptimizerSpec& opt,
                           std::size_t record_every) {
  if (record_every == 0) throw DomainError("run_factorization: record_every must be >= 1");
  FactorizationRun run(cfg, opt);
  RunTrace trace;
  trace.optimizer = opt.kind;
  for (;;) {
    const std::size_t t = run.step();
    const bool record = t % record_every == 0 || t == cfg.steps;
    if (record) {
      const TracePoint p = run.observe();
      trace.points.push_back(p);
      if (!std::isfinite(p.loss) || p.loss > kDivergenceLoss) {
        trace.diverged = true;
        break;
      }
    }
    if (t == cfg.steps) break;
    run.advance();
    if (run.diverged()) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  CsvWriter w(out, {"step", "loss", "effective_rank", "sigma1"});
  for (const auto& p : trace.points) {
    w.row({std::to_string(p.step), format_real(p.loss), format_real(p.effective_rank),
           format_real(p.sigma1)});
  }
}

}  // namespace muonlab
