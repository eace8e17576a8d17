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

#include "muonlab/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "muonlab/errors.hpp"
#include "muonlab/rng.hpp"
#include "muonlab/spectral.hpp"

namespace muonlab {
namespace {

void fill_noise(DenseMatrix& m, RmtNoise noise, Rng& rng) {
  switch (noise) {
    case RmtNoise::gaussian:
      rng.fill_normal(m.entries());
      return;
    case RmtNoise::student_t: {
      const double unit = 1.0 / std::sqrt(3.0);
      for (double& v : m.entries()) v = unit * rng.student_t(3.0);
      return;
    }
    case RmtNoise::ones:
      for (double& v : m.entries()) v = 1.0;
      return;
  }
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  const double n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

std::vector<double> random_unit(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  rng.fill_normal(v);
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

std::string to_string(RmtNoise noise) {
  switch (noise) {
    case RmtNoise::gaussian:
      return "gaussian";
    case RmtNoise::student_t:
      return "student_t";
    case RmtNoise::ones:
      return "ones";
  }
  return "gaussian";
}

RmtNoise rmt_noise_from_string(const std::string& name) {
  if (name == "gaussian") return RmtNoise::gaussian;
  if (name == "student_t") return RmtNoise::student_t;
  if (name == "ones") return RmtNoise::ones;
  throw DomainError("unknown rmt noise '" + name + "'");
}

double scaling_constant(const DenseMatrix& xi) {
  return std::sqrt(static_cast<double>(xi.size())) / frobenius_norm(xi);
}

ConcentrationReport concentration_experiment(std::size_t d, std::size_t n_samples,
                                             RmtNoise noise, std::uint64_t seed) {
  if (n_samples < 100) throw DomainError("concentration_experiment: n_samples must be >= 100");
  if (d == 0) throw DomainError("concentration_experiment: d must be positive");
  std::vector<double> ct(n_samples);
  const Rng root(seed, 0x636f6e63ull);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_samples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Rng rng = root.substream(static_cast<std::uint64_t>(i));
    DenseMatrix xi(d, d);
    fill_noise(xi, noise, rng);
    ct[static_cast<std::size_t>(i)] = scaling_constant(xi);
  }
  ConcentrationReport r;
  r.dim = d;
  r.n_samples = n_samples;
  mean_std(ct, r.mean_ct, r.std_ct);
  r.min_ct = *std::min_element(ct.begin(), ct.end());
  r.max_ct = *std::max_element(ct.begin(), ct.end());
  // Keep min <= mean <= max under rounding for constant samples.
  r.mean_ct = std::clamp(r.mean_ct, r.min_ct, r.max_ct);
  return r;
}

AngleReport subspace_angle_experiment(double lambda_s, std::size_t d, std::size_t trials,
                                      std::uint64_t seed) {
  if (!(lambda_s >= 0.0)) throw DomainError("subspace_angle_experiment: lambda_s must be >= 0");
  if (d < 2 || trials == 0) throw DomainError("subspace_angle_experiment: need d >= 2, trials >= 1");
  const double noise_sd = 1.0 / std::sqrt(static_cast<double>(d));
  const Rng root(seed, 0x616e676cull);
  std::vector<double> sines(trials);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    Rng rng = root.substream(static_cast<std::uint64_t>(t));
    const std::vector<double> u = random_unit(d, rng);
    const std::vector<double> v = random_unit(d, rng);
    DenseMatrix m(d, d);
    rng.fill_normal(m.entries());
    m *= noise_sd;
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) m(r, c) += lambda_s * u[r] * v[c];
    }
    const SingularTriplet top = top_singular_triplet(m, rng.next_u64(), 5000, 1e-12);
    double dot = 0.0;
    for (std::size_t r = 0; r < d; ++r) dot += u[r] * top.left[r];
    sines[static_cast<std::size_t>(t)] = std::sqrt(std::max(0.0, 1.0 - dot * dot));
  }
  AngleReport r;
  r.lambda_s = lambda_s;
  r.noise_scale = noise_sd;
  r.dim = d;
  r.trials = trials;
  mean_std(sines, r.mean_sin_angle, r.std_sin_angle);
  r.mean_sin_angle = std::clamp(r.mean_sin_angle, 0.0, 1.0);
  return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fit_slope: x values are all equal");
  return sxy / sxx;
}

EnergyReport energy_scaling_experiment(const std::vector<std::size_t>& dims,
                                       std::size_t samples, std::uint64_t seed) {
  if (dims.size() < 2 || samples == 0) {
    throw DomainError("energy_scaling_experiment: need >= 2 dims and >= 1 sample");
  }
  EnergyReport rep;
  std::vector<double> lx, ly;
  for (std::size_t d : dims) {
    if (d == 0) throw DomainError("energy_scaling_experiment: dims must be positive");
    const Rng root(seed, derive_seed({0x656e6572ull, d}));
    double energy = 0.0, projected = 0.0;
    DenseMatrix xi(d, d);
    for (std::size_t s = 0; s < samples; ++s) {
      Rng rng = root.substream(s);
      rng.fill_normal(xi.entries());
      const double f = frobenius_norm(xi);
      energy += f * f;
      projected += xi(0, 0) * xi(0, 0);
    }
    EnergyRow row;
    row.dim = d;
    row.total_dim = static_cast<double>(d) * static_cast<double>(d);
    row.mean_energy = energy / static_cast<double>(samples);
    row.mean_projected = projected / static_cast<double>(samples);
    rep.rows.push_back(row);
    lx.push_back(std::log(row.total_dim));
    ly.push_back(std::log(row.mean_energy));
  }
  rep.slope = fit_slope(lx, ly);
  return rep;
}

}  // namespace muonlab
