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
#include <optional>
#include <utility>
#include <vector>

namespace muonlab {

// Coefficients of the odd quintic rho(x) = a x + b x^3 + c x^5.
struct PolyCoeffs {
  double a = 3.4445;
  double b = -4.7750;
  double c = 2.0315;

  bool operator==(const PolyCoeffs&) const = default;
};

double rho(double x, const PolyCoeffs& p = {});
double rho_derivative(double x, const PolyCoeffs& p = {});
// h(x) = rho(x) / x = a + b x^2 + c x^4, equal to a at zero.
double scaling_factor(double x, const PolyCoeffs& p = {});
// k-fold composition; throws OverflowError on a non-finite iterate.
double rho_iter(double x, int k, const PolyCoeffs& p = {});

// Positive roots of rho'(x) = a + 3b x^2 + 5c x^4, ascending.
std::vector<double> critical_points(const PolyCoeffs& p = {});

struct InvarianceReport {
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double image_lo = 0.0;
  double image_hi = 0.0;
  bool invariant = false;
  std::vector<double> critical_points;  // interior critical points of [lo, hi]
};

// Exact image of [lo, hi] from endpoint values and interior critical points.
InvarianceReport verify_invariance(const PolyCoeffs& p, double lo, double hi);

struct AmplificationReport {
  bool passed = false;
  double delta0 = 0.0;  // 0.02 / a^4
  double worst_ratio = 0.0;
  double worst_x = 0.0;
  double required = 483.0;
};

// min rho^(5)(x)/x over a log grid on (1e-12, 0.02/a^4].
AmplificationReport verify_amplification(const PolyCoeffs& p = {}, std::size_t grid_size = 10000,
                                         double required = 483.0);

struct FloorReport {
  bool passed = false;
  double min_value = 0.0;
  double argmin = 0.0;
  double threshold = 0.03;
};

// min rho^(5)(x) over a linear grid on [lo, hi].
FloorReport verify_floor(const PolyCoeffs& p = {}, std::size_t grid_size = 100000,
                         double lo = 1e-4, double hi = 0.6, double threshold = 0.03);

struct PerturbationReport {
  double radius = 0.0;
  std::size_t samples = 0;
  // Samples for which some forward-invariant subinterval of [lo, hi] with the
  // same lower end bound exists.
  std::size_t certified = 0;
  // Samples for which [lo, hi] itself stays invariant.
  std::size_t nominal_invariant = 0;
  double worst_image_lo = 0.0;

  bool all_certified() const { return certified == samples; }
};

// Checks perturbed coefficients p + radius * s_i for s_i on a Fibonacci
// lattice of the unit sphere in (a, b, c) space.
PerturbationReport certify_perturbations(const PolyCoeffs& p, double lo, double hi,
                                         double radius, std::size_t samples = 64);

struct RobustnessReport {
  double radius = 0.0;  // margin / lipschitz
  double margin = 0.0;  // image_lo - lo
  double lipschitz = 0.0;  // sqrt(hi^2 + hi^6 + hi^10)
  PerturbationReport certification;  // at 0.99 * radius
};

// Throws DomainError when [lo, hi] is not invariant under p.
RobustnessReport robustness_radius(const PolyCoeffs& p, double lo, double hi,
                                   std::size_t samples = 64);

// Iterates J <- rho(J) from [lo, hi] and returns the first J whose image lies
// inside it, if any within max_iter rounds.
std::optional<std::pair<double, double>> find_invariant_interval(const PolyCoeffs& p, double lo,
                                                                 double hi, int max_iter = 64);

}  // namespace muonlab
