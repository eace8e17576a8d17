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

#include "muonlab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "muonlab/errors.hpp"
#include "muonlab/kernels.hpp"
#include "muonlab/report.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {

void ProbeConfig::validate() const {
  if (grid_points == 0 || grid_points % 2 == 0) {
    throw ConfigError("grid_points", "must be odd and positive");
  }
  if (!(scale_range > 0.0)) throw ConfigError("scale_range", "must be positive");
  if (svd_batches == 0) throw ConfigError("svd_batches", "must be positive");
  if (eval_batches == 0) throw ConfigError("eval_batches", "must be positive");
}

std::size_t ProbeConfig::resolve_bulk_index(std::size_t rows, std::size_t cols) const {
  const std::size_t k = std::min(rows, cols);
  if (bulk_index < 0) return std::min<std::size_t>(499, k - 1);
  return static_cast<std::size_t>(bulk_index);
}

Directions extract_directions(const DenseMatrix& g_exact, std::size_t k) {
  const std::size_t kmax = std::min(g_exact.rows(), g_exact.cols());
  if (k == 0 || k >= kmax) {
    throw DomainError("extract_directions: degenerate bulk, index " + std::to_string(k) +
                      " must lie in [1, " + std::to_string(kmax) + ")");
  }
  const SvdFactors f = thin_svd(g_exact);
  if (f.singular_values[0] == 0.0) throw DomainError("extract_directions: zero gradient");
  if (f.singular_values[k] < 1e-14) {
    throw DomainError("extract_directions: degenerate bulk, sigma_" + std::to_string(k) +
                      " below 1e-14");
  }
  auto rank_one = [&](std::size_t j) {
    DenseMatrix m(g_exact.rows(), g_exact.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        m(r, c) = f.left_vectors(r, j) * f.right_vectors(c, j);
      }
    }
    m *= 1.0 / frobenius_norm(m);
    return m;
  };
  return {rank_one(0), rank_one(k), f.singular_values[0], f.singular_values[k]};
}

LossSurface grid_scan(const LossEval& loss_eval, const DenseMatrix& center,
                      const DenseMatrix& d_alpha, const DenseMatrix& d_beta,
                      const ProbeConfig& cfg) {
  cfg.validate();
  if (!center.same_shape(d_alpha) || !center.same_shape(d_beta)) {
    throw DomainError("grid_scan: direction shapes differ from the center");
  }
  const std::size_t n = cfg.grid_points;
  LossSurface s;
  s.alphas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.alphas[i] = n == 1 ? 0.0
                         : -cfg.scale_range + 2.0 * cfg.scale_range * static_cast<double>(i) /
                                                  static_cast<double>(n - 1);
  }
  s.betas = s.alphas;
  s.losses.assign(n * n, std::numeric_limits<double>::quiet_NaN());
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(n * n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const std::size_t ia = static_cast<std::size_t>(idx) / n;
    const std::size_t ib = static_cast<std::size_t>(idx) % n;
    DenseMatrix w = center;
    if (s.alphas[ia] != 0.0) w.axpy(s.alphas[ia], d_alpha);
    if (s.betas[ib] != 0.0) w.axpy(s.betas[ib], d_beta);
    try {
      const double v = loss_eval(w);
      if (std::isfinite(v)) s.losses[static_cast<std::size_t>(idx)] = v;
    } catch (...) {
      // recorded as missing
    }
  }
  for (double v : s.losses) {
    if (std::isnan(v)) ++s.missing;
  }
  const std::size_t mid = n / 2;
  s.center_loss = s.at(mid, mid);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t ia = 0; ia < n; ++ia) {
    const double v = s.at(ia, mid);
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  s.spike_range = hi >= lo ? hi - lo : std::numeric_limits<double>::quiet_NaN();
  return s;
}

ProbeResult probe_factor(const FactorizationRun& run, const ProbeConfig& cfg) {
  cfg.validate();
  const DenseMatrix& a = run.a();
  const DenseMatrix& b = run.b();
  const std::uint64_t base = static_cast<std::uint64_t>(run.step()) << 20;

  DenseMatrix grad(a.rows(), a.cols());
  for (std::size_t i = 0; i < cfg.svd_batches; ++i) {
    const Batch batch = run.probe_batch(base + i);
    grad += loss_and_grads(a, b, batch.x, batch.y).grad_a;
  }
  grad *= 1.0 / static_cast<double>(cfg.svd_batches);
  const Directions dirs = extract_directions(grad, cfg.resolve_bulk_index(a.rows(), a.cols()));

  // Frozen evaluation set; x B is independent of A.
  struct Frozen {
    DenseMatrix xb;
    DenseMatrix y;
  };
  std::vector<Frozen> frozen;
  for (std::size_t i = 0; i < cfg.eval_batches; ++i) {
    Batch batch = run.probe_batch(base + cfg.svd_batches + i);
    frozen.push_back({matmul(batch.x, b), std::move(batch.y)});
  }
  const LossEval eval = [&frozen](const DenseMatrix& a_probe) {
    double sum = 0.0;
    for (const auto& f : frozen) {
      DenseMatrix r = matmul_nt(f.xb, a_probe);
      r -= f.y;
      const double n = frobenius_norm(r);
      sum += n * n / (2.0 * static_cast<double>(r.rows()));
    }
    return sum / static_cast<double>(frozen.size());
  };

  ProbeResult out;
  out.step = run.step();
  out.surface = grid_scan(eval, a, dirs.alpha, dirs.beta, cfg);
  const EffectiveRank er = effective_rank(a);
  out.effective_rank = er.value;
  out.normalized_entropy = er.normalized_entropy;
  return out;
}

std::vector<ProbeResult> probe_at_checkpoints(FactorizationRun& run,
                                              const std::vector<std::size_t>& checkpoints,
                                              const ProbeConfig& cfg) {
  std::vector<ProbeResult> out;
  for (std::size_t c : checkpoints) {
    if (c < run.step()) throw DomainError("probe_at_checkpoints: checkpoints must ascend");
    if (c > run.config().steps) {
      throw DomainError("probe_at_checkpoints: checkpoint " + std::to_string(c) +
                        " beyond the run horizon");
    }
    while (run.step() < c) {
      run.advance();
      if (run.diverged()) throw DomainError("probe_at_checkpoints: run diverged");
    }
    out.push_back(probe_factor(run, cfg));
  }
  return out;
}

void write_surface_csv(std::ostream& out, const LossSurface& s) {
  CsvWriter w(out, {"alpha", "beta", "loss"});
  for (std::size_t ia = 0; ia < s.alphas.size(); ++ia) {
    for (std::size_t ib = 0; ib < s.betas.size(); ++ib) {
      w.row({format_real(s.alphas[ia]), format_real(s.betas[ib]), format_real(s.at(ia, ib))});
    }
  }
}

}  // namespace muonlab
