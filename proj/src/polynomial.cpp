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

#include "muonlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "muonlab/errors.hpp"

namespace muonlab {
namespace {

struct Interval {
  double lo;
  double hi;
};

// Interior critical points of rho on (lo, hi), including negative ones.
std::vector<double> interior_critical_points(const PolyCoeffs& p, double lo, double hi) {
  std::vector<double> out;
  for (double r : critical_points(p)) {
    if (r > lo && r < hi) out.push_back(r);
    if (-r > lo && -r < hi) out.push_back(-r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Interval image(const PolyCoeffs& p, double lo, double hi) {
  double mn = std::min(rho(lo, p), rho(hi, p));
  double mx = std::max(rho(lo, p), rho(hi, p));
  for (double x : interior_critical_points(p, lo, hi)) {
    const double v = rho(x, p);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

}  // namespace

double rho(double x, const PolyCoeffs& p) {
  const double x2 = x * x;
  return x * (p.a + x2 * (p.b + x2 * p.c));
}

double rho_derivative(double x, const PolyCoeffs& p) {
  const double x2 = x * x;
  return p.a + x2 * (3.0 * p.b + 5.0 * p.c * x2);
}

double scaling_factor(double x, const PolyCoeffs& p) {
  const double x2 = x * x;
  return p.a + x2 * (p.b + x2 * p.c);
}

double rho_iter(double x, int k, const PolyCoeffs& p) {
  if (k < 0) throw DomainError("rho_iter: k must be non-negative");
  for (int i = 0; i < k; ++i) {
    x = rho(x, p);
    if (!std::isfinite(x)) {
      throw OverflowError("rho_iter: non-finite iterate at step " + std::to_string(i + 1));
    }
  }
  return x;
}

std::vector<double> critical_points(const PolyCoeffs& p) {
  // 5c y^2 + 3b y + a = 0 with y = x^2 > 0.
  std::vector<double> ys;
  const double qa = 5.0 * p.c;
  const double qb = 3.0 * p.b;
  const double qc = p.a;
  if (qa == 0.0) {
    if (qb != 0.0) ys.push_back(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      // Numerically stable pair.
      const double s = std::sqrt(disc);
      const double q = -0.5 * (qb + std::copysign(s, qb));
      if (q != 0.0) {
        ys.push_back(q / qa);
        ys.push_back(qc / q);
      } else {
        ys.push_back(0.0);
      }
    }
  }
  std::vector<double> roots;
  for (double y : ys) {
    if (y > 0.0 && std::isfinite(y)) roots.push_back(std::sqrt(y));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

InvarianceReport verify_invariance(const PolyCoeffs& p, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("verify_invariance: requires lo < hi");
  InvarianceReport r;
  r.interval_lo = lo;
  r.interval_hi = hi;
  r.critical_points = interior_critical_points(p, lo, hi);
  const Interval im = image(p, lo, hi);
  r.image_lo = im.lo;
  r.image_hi = im.hi;
  r.invariant = im.lo >= lo && im.hi <= hi;
  return r;
}

AmplificationReport verify_amplification(const PolyCoeffs& p, std::size_t grid_size,
                                         double required) {
  if (grid_size < 100) throw DomainError("verify_amplification: grid_size must be >= 100");
  AmplificationReport r;
  r.required = required;
  r.delta0 = 0.02 / std::pow(p.a, 4);
  const double log_lo = std::log(1e-12);
  const double log_hi = std::log(r.delta0);
  r.worst_ratio = std::numeric_limits<double>::infinity();
  // Grid excludes 1e-12 itself and ends exactly at delta0.
  for (std::size_t i = 1; i <= grid_size; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_size);
    const double x = i == grid_size ? r.delta0 : std::exp(log_lo + t * (log_hi - log_lo));
    const double ratio = rho_iter(x, 5, p) / x;
    if (ratio < r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_x = x;
    }
  }
  r.passed = r.worst_ratio >= required;
  return r;
}

FloorReport verify_floor(const PolyCoeffs& p, std::size_t grid_size, double lo, double hi,
                         double threshold) {
  if (grid_size < 1000) throw DomainError("verify_floor: grid_size must be >= 1000");
  if (!(lo < hi)) throw DomainError("verify_floor: requires lo < hi");
  FloorReport r;
  r.threshold = threshold;
  r.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double x = i + 1 == grid_size ? hi : lo + t * (hi - lo);
    const double v = rho_iter(x, 5, p);
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin = x;
    }
  }
  r.passed = r.min_value > threshold;
  return r;
}

std::optional<std::pair<double, double>> find_invariant_interval(const PolyCoeffs& p, double lo,
                                                                 double hi, int max_iter) {
  Interval j{lo, hi};
  for (int k = 0; k < max_iter; ++k) {
    if (!(j.lo < j.hi) || !std::isfinite(j.lo) || !std::isfinite(j.hi)) return std::nullopt;
    const Interval next = image(p, j.lo, j.hi);
    if (next.lo >= j.lo && next.hi <= j.hi) return std::make_pair(j.lo, j.hi);
    j = {std::max(next.lo, j.lo), std::min(next.hi, j.hi)};
    // Intersection keeps J inside the nominal set; an image escaping on both
    // sides ends the search.
    if (next.lo < lo && next.hi > hi) return std::nullopt;
  }
  return std::nullopt;
}

PerturbationReport certify_perturbations(const PolyCoeffs& p, double lo, double hi,
                                         double radius, std::size_t samples) {
  if (samples == 0) throw DomainError("certify_perturbations: samples must be positive");
  PerturbationReport r;
  r.radius = radius;
  r.samples = samples;
  r.worst_image_lo = std::numeric_limits<double>::infinity();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const PolyCoeffs q{p.a + radius * ring * std::cos(phi), p.b + radius * ring * std::sin(phi),
                       p.c + radius * z};
    const InvarianceReport nominal = verify_invariance(q, lo, hi);
    if (nominal.invariant) ++r.nominal_invariant;
    r.worst_image_lo = std::min(r.worst_image_lo, nominal.image_lo);
    const auto j = find_invariant_interval(q, lo, hi);
    if (j && j->first >= lo) ++r.certified;
  }
  return r;
}

RobustnessReport robustness_radius(const PolyCoeffs& p, double lo, double hi,
                                   std::size_t samples) {
  const InvarianceReport inv = verify_invariance(p, lo, hi);
  if (!inv.invariant) {
    throw DomainError("robustness_radius: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] is not invariant under the nominal coefficients");
  }
  RobustnessReport r;
  r.margin = inv.image_lo - lo;
  r.lipschitz = std::sqrt(hi * hi + std::pow(hi, 6) + std::pow(hi, 10));
  r.radius = r.margin / r.lipschitz;
  r.certification = certify_perturbations(p, lo, hi, 0.99 * r.radius, samples);
  return r;
}

}  // namespace muonlab
