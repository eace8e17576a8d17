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

#include "muonlab/landscape.hpp"

#include <cmath>
#include <vector>

#include "muonlab/errors.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {
namespace {

void check_weight(const DenseMatrix& w, const SaddleConfig& cfg) {
  if (w.rows() != cfg.dim || w.cols() != cfg.dim) {
    throw DomainError("saddle gradient: weight must be dim x dim");
  }
}

double drift(const DenseMatrix& w, const SaddleConfig& cfg) { return -cfg.lambda * w(0, 0); }

}  // namespace

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::standard:
      return "standard";
    case NoiseMode::isotropic:
      return "isotropic";
    case NoiseMode::heavy_tail:
      return "heavy_tail";
  }
  return "standard";
}

NoiseMode noise_mode_from_string(const std::string& name) {
  if (name == "standard") return NoiseMode::standard;
  if (name == "isotropic") return NoiseMode::isotropic;
  if (name == "heavy_tail" || name == "heavy-tail") return NoiseMode::heavy_tail;
  throw DomainError("unknown noise mode '" + name + "'");
}

void SaddleConfig::validate() const {
  if (dim < 2) throw ConfigError("dim", "must be >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be positive");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("kappa", "must be >= 1");
  if (!(sigma_ortho >= 0.0) || !std::isfinite(sigma_ortho)) {
    throw ConfigError("sigma_ortho", "must be non-negative");
  }
  if (!(r0 > 0.0)) throw ConfigError("r0", "must be positive");
  if (!(heavy_tail_df > 0.0)) throw ConfigError("heavy_tail_df", "must be positive");
  if (!std::isfinite(heavy_tail_alpha)) throw ConfigError("heavy_tail_alpha", "must be finite");
}

DenseMatrix variance_matrix(const SaddleConfig& cfg) {
  cfg.validate();
  const double e0 = cfg.eps0();
  DenseMatrix v(cfg.dim, cfg.dim, e0);
  v(0, 0) = cfg.kappa * e0 + e0;
  return v;
}

DenseMatrix gen_gradient(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng) {
  check_weight(w, cfg);
  const double e0 = cfg.eps0();
  DenseMatrix g(cfg.dim, cfg.dim);
  rng.fill_normal(g.entries());
  g *= std::sqrt(e0);
  g(0, 0) *= std::sqrt(cfg.kappa + 1.0);
  g(0, 0) += drift(w, cfg);
  return g;
}

std::vector<double> heavy_tail_variances(const SaddleConfig& cfg) {
  const std::size_t n = cfg.dim * cfg.dim;
  std::vector<double> var(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var[i] = std::pow(1.0 + static_cast<double>(i), -cfg.heavy_tail_alpha);
    sum += var[i];
  }
  const double scale = cfg.eps0() * static_cast<double>(n) / sum;
  for (double& v : var) v *= scale;
  return var;
}

DenseMatrix gen_gradient_ablation(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng) {
  check_weight(w, cfg);
  const double e0 = cfg.eps0();
  const std::size_t n = cfg.dim * cfg.dim;
  DenseMatrix g(cfg.dim, cfg.dim);
  switch (cfg.noise_mode) {
    case NoiseMode::standard:
      throw DomainError("gen_gradient_ablation: standard mode has no ablation");
    case NoiseMode::isotropic: {
      rng.fill_normal(g.entries());
      const double norm = frobenius_norm(g);
      g *= cfg.sigma_ortho * static_cast<double>(cfg.dim) / norm;
      g(0, 0) += std::sqrt(cfg.kappa * e0) * rng.normal();
      break;
    }
    case NoiseMode::heavy_tail: {
      const double df = cfg.heavy_tail_df;
      if (!(df > 2.0)) throw DomainError("heavy_tail: df must exceed 2 for finite variance");
      const std::vector<double> var = heavy_tail_variances(cfg);
      const double unit = 1.0 / std::sqrt(df / (df - 2.0));
      double* gp = g.data();
      for (std::size_t i = 0; i < n; ++i) {
        gp[i] = std::sqrt(var[i]) * unit * rng.student_t(df);
      }
      g(0, 0) = std::sqrt((cfg.kappa + 1.0) * e0) * unit * rng.student_t(df);
      break;
    }
  }
  g(0, 0) += drift(w, cfg);
  return g;
}

DenseMatrix saddle_gradient(const DenseMatrix& w, const SaddleConfig& cfg, Rng& rng) {
  return cfg.noise_mode == NoiseMode::standard ? gen_gradient(w, cfg, rng)
                                               : gen_gradient_ablation(w, cfg, rng);
}

}  // namespace muonlab
