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


#include "doctest.h"

#include <cmath>

#include "muonlab/errors.hpp"
#include "muonlab/optimizers.hpp"
#include "muonlab/spectral.hpp"
#include "oracles.hpp"

using doctest::Approx;
using muonlab::DenseMatrix;

namespace {

DenseMatrix muon_update(const DenseMatrix& g, const muonlab::MuonConfig& cfg = {}) {
  muonlab::MuonState s(cfg, g.rows(), g.cols());
  DenseMatrix w(g.rows(), g.cols());
  muonlab::muon_step(w, g, s);
  return w;
}

std::size_t numeric_rank(const DenseMatrix& m) {
  const auto s = oracle::singular_values(m);
  std::size_t r = 0;
  for (double v : s) r += v > 1e-6 * s[0] ? 1 : 0;
  return r;
}

}  // namespace

TEST_CASE("muon: zero gradient at the saddle is a fixed point") {
  muonlab::MuonState s({}, 3, 4);
  DenseMatrix w = oracle::gaussian(3, 4, 1);
  const DenseMatrix before = w;
  const auto diag = muonlab::muon_step(w, DenseMatrix(3, 4), s);
  CHECK(w == before);
  CHECK(diag.momentum_norm == 0.0);
}

TEST_CASE("muon: scalar oracle") {
  muonlab::MuonState s({}, 1, 1);
  DenseMatrix w(1, 1, 0.25);
  muonlab::muon_step(w, DenseMatrix(1, 1, 1.0), s);
  const double want = -0.2 * 0.02 * 1.0 * oracle::rho_k(1.0, 5);
  CHECK(w(0, 0) - 0.25 == Approx(want).epsilon(1e-10));
  CHECK(want == Approx(-0.002786).epsilon(2e-4));
  CHECK(s.momentum(0, 0) == 1.0);
  muonlab::muon_step(w, DenseMatrix(1, 1, 1.0), s);
  CHECK(s.momentum(0, 0) == Approx(1.95));
}

TEST_CASE("muon: rank-1 gradient keeps its singular vectors") {
  const std::vector<double> u{1, 2, 2}, v{3, 0, -4, 0};
  const DenseMatrix g = DenseMatrix::outer(u, v);
  const DenseMatrix dw = muon_update(g);
  // dw = -c g for one positive scalar c.
  const double c = -dw(0, 0) / g(0, 0);
  CHECK(c > 0.0);
  CHECK(oracle::rel_frobenius(dw, -c * g) <= 1e-12);
}

TEST_CASE("muon: scale invariance") {
  const DenseMatrix g = oracle::gaussian(12, 7, 3);
  const DenseMatrix ref = muon_update(g);
  // The 1e-12 norm guard perturbs the update by about guard / |c G|_F, so
  // scales stay well above it.
  for (double c : {1e-2, 0.3, 250.0}) {
    CHECK(oracle::rel_frobenius(muon_update(c * g), ref) <= 1e-10);
  }
}

TEST_CASE("muon: update norm bound") {
  for (auto [m, n] : {std::pair{8, 8}, {20, 6}, {5, 30}}) {
    const DenseMatrix dw = muon_update(oracle::gaussian(m, n, 10 + m));
    const double bound = 0.2 * 0.02 * std::sqrt(std::max(m, n)) * std::sqrt(std::min(m, n)) * 1.205;
    CHECK(muonlab::frobenius_norm(dw) <= bound);
  }
}

TEST_CASE("muon: rank preservation from a fresh state") {
  const DenseMatrix g =
      oracle::matmul(oracle::gaussian(10, 3, 21), oracle::gaussian(3, 12, 22));
  CHECK(numeric_rank(g) == 3);
  CHECK(numeric_rank(muon_update(g)) == 3);
}

TEST_CASE("muon: decoupled weight decay and lr scale") {
  muonlab::MuonConfig cfg;
  cfg.weight_decay = 0.5;
  muonlab::MuonState s(cfg, 2, 2);
  DenseMatrix w{{1, 2}, {3, 4}};
  muonlab::muon_step(w, DenseMatrix(2, 2), s, 0.5);
  CHECK(w(1, 1) == Approx(4.0 * (1.0 - 0.5 * 0.02 * 0.5)));
  const DenseMatrix g = oracle::gaussian(4, 4, 5);
  muonlab::MuonState s1({}, 4, 4), s2({}, 4, 4);
  DenseMatrix w1(4, 4), w2(4, 4);
  muonlab::muon_step(w1, g, s1, 1.0);
  muonlab::muon_step(w2, g, s2, 0.25);
  CHECK(oracle::rel_frobenius(w2, 0.25 * w1) <= 1e-14);
}

TEST_CASE("muon: diagnostics report the normalized top singular value") {
  const DenseMatrix g = oracle::gaussian(9, 6, 8);
  muonlab::MuonState s({}, 9, 6);
  DenseMatrix w(9, 6);
  const auto d = muonlab::muon_step(w, g, s, 1.0, true);
  REQUIRE(d.normalized_top_sv.has_value());
  const double want = oracle::singular_values(g)[0] / oracle::frobenius(g);
  CHECK(*d.normalized_top_sv == Approx(want).epsilon(1e-8));
  CHECK(d.momentum_norm == Approx(oracle::frobenius(g)));
}

TEST_CASE("muon: input validation") {
  muonlab::MuonState s({}, 2, 2);
  DenseMatrix w(2, 2);
  DenseMatrix bad(2, 2);
  bad(0, 0) = INFINITY;
  CHECK_THROWS_AS(muonlab::muon_step(w, bad, s), muonlab::InvalidInputError);
  CHECK_THROWS_AS(muonlab::muon_step(w, DenseMatrix(2, 3), s), muonlab::DomainError);
  CHECK_THROWS_AS(muonlab::muon_step(w, DenseMatrix(2, 2), s, 0.0), muonlab::DomainError);
  CHECK_THROWS_AS(muonlab::muon_step(w, DenseMatrix(2, 2), s, 1.5), muonlab::DomainError);
  muonlab::MuonConfig cfg;
  cfg.mu = 1.0;
  CHECK_THROWS_AS(muonlab::MuonState(cfg, 2, 2), muonlab::DomainError);
}

TEST_CASE("adamw: zero gradient and pure decay") {
  muonlab::AdamState s({}, 2, 2);
  DenseMatrix w{{1, -2}, {3, 0.5}};
  const DenseMatrix before = w;
  muonlab::adamw_step(w, DenseMatrix(2, 2), s);
  CHECK(w == before);
  muonlab::AdamConfig cfg;
  cfg.weight_decay = 0.01;
  muonlab::AdamState d(cfg, 2, 2);
  muonlab::adamw_step(w, DenseMatrix(2, 2), d);
  CHECK(w(0, 1) == Approx(-2.0 * (1.0 - 3e-6)).epsilon(1e-15));
}

TEST_CASE("adamw: first-step bias correction") {
  muonlab::AdamState s({}, 1, 1);
  DenseMatrix w(1, 1);
  muonlab::adamw_step(w, DenseMatrix(1, 1, 1.0), s);
  CHECK(w(0, 0) == Approx(-3e-4 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(s.step_count == 1);
  CHECK(s.first_moment(0, 0) == Approx(0.1));
  CHECK(s.second_moment(0, 0) == Approx(0.001));
}

TEST_CASE("adamw: constant gradient saturates to eta times the sign") {
  muonlab::AdamState s({}, 1, 2);
  DenseMatrix w(1, 2);
  const DenseMatrix g{{0.37, -4.0}};
  DenseMatrix prev = w;
  for (int t = 0; t < 3000; ++t) {
    prev = w;
    muonlab::adamw_step(w, g, s);
  }
  CHECK(w(0, 0) - prev(0, 0) == Approx(-3e-4).epsilon(1e-6));
  CHECK(w(0, 1) - prev(0, 1) == Approx(3e-4).epsilon(1e-6));
  for (double v : s.second_moment.entries()) CHECK(v >= 0.0);
}

TEST_CASE("adamw: oracle over several steps") {
  const DenseMatrix g1{{0.3, -0.2}}, g2{{-0.1, 0.4}};
  muonlab::AdamConfig cfg;
  cfg.weight_decay = 0.1;
  muonlab::AdamState s(cfg, 1, 2);
  DenseMatrix w{{1.0, 2.0}};
  muonlab::adamw_step(w, g1, s, 0.5);
  muonlab::adamw_step(w, g2, s, 0.5);
  for (int i = 0; i < 2; ++i) {
    double wi = i == 0 ? 1.0 : 2.0, m = 0, v = 0;
    const double gs[2] = {g1(0, i), g2(0, i)};
    for (int t = 1; t <= 2; ++t) {
      m = 0.9 * m + 0.1 * gs[t - 1];
      v = 0.999 * v + 0.001 * gs[t - 1] * gs[t - 1];
      const double lr = 0.5 * 3e-4;
      wi = wi * (1 - lr * 0.1) - lr * (m / (1 - std::pow(0.9, t))) /
                                     (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(w(0, i) == Approx(wi).epsilon(1e-14));
  }
}

TEST_CASE("adamw: validation") {
  muonlab::AdamState s({}, 2, 2);
  DenseMatrix w(2, 2), bad(2, 2);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(muonlab::adamw_step(w, bad, s), muonlab::InvalidInputError);
  muonlab::AdamConfig cfg;
  cfg.beta2 = 1.0;
  CHECK_THROWS_AS(muonlab::AdamState(cfg, 1, 1), muonlab::DomainError);
}

TEST_CASE("learning-rate schedules") {
  muonlab::LrSchedule constant;
  CHECK(muonlab::lr_at(constant, 0) == 1.0);
  CHECK(muonlab::lr_at(constant, 12345) == 1.0);
  muonlab::LrSchedule tail{muonlab::ScheduleKind::cosine_tail, 10000, 0.9, 0.01};
  CHECK(muonlab::lr_at(tail, 0) == 1.0);
  CHECK(muonlab::lr_at(tail, 8999) == 1.0);
  CHECK(muonlab::lr_at(tail, 9999) == Approx(0.01).epsilon(1e-12));
  // Halfway through the tail the cosine sits at the midpoint.
  CHECK(muonlab::lr_at(tail, 9000 + 999 / 2) == Approx(0.505).epsilon(2e-3));
  double prev = 2.0;
  for (std::size_t t = 0; t < 10000; t += 37) {
    const double v = muonlab::lr_at(tail, t);
    CHECK(v <= prev);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  muonlab::LrSchedule full{muonlab::ScheduleKind::cosine_tail, 5000, 0.0, 0.01};
  CHECK(muonlab::lr_at(full, 0) == 1.0);
  CHECK(muonlab::lr_at(full, 4999) == Approx(0.01));
  CHECK(muonlab::schedule_kind_from_string("cosine-tail") == muonlab::ScheduleKind::cosine_tail);
  CHECK(muonlab::to_string(muonlab::ScheduleKind::constant) == "constant");
  CHECK_THROWS_AS(muonlab::schedule_kind_from_string("linear"), muonlab::DomainError);
  muonlab::LrSchedule bad{muonlab::ScheduleKind::cosine_tail, 10, 0.9, 1.5};
  CHECK_THROWS_AS(bad.validate(), muonlab::DomainError);
}
