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
#include <sstream>

#include "muonlab/errors.hpp"
#include "muonlab/factorization.hpp"
#include "muonlab/report.hpp"
#include "muonlab/spectral.hpp"
#include "oracles.hpp"

using doctest::Approx;
using muonlab::DenseMatrix;
using muonlab::FactorizationConfig;
using muonlab::OptimizerKind;
using muonlab::Rng;

namespace {

FactorizationConfig small_cfg(std::size_t d = 24, std::size_t r = 6) {
  FactorizationConfig cfg;
  cfg.dim = d;
  cfg.rank = r;
  cfg.batch = 16;
  cfg.steps = 40;
  cfg.kappa = 1e3;
  cfg.seed = 3;
  return cfg;
}

// Central-difference directional derivative of the loss in A (or B).
double fd_directional(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x,
                      const DenseMatrix& y, const DenseMatrix& dir, bool in_a, double h) {
  DenseMatrix ap = a, am = a, bp = b, bm = b;
  (in_a ? ap : bp).axpy(h, dir);
  (in_a ? am : bm).axpy(-h, dir);
  return (muonlab::loss_only(ap, bp, x, y) - muonlab::loss_only(am, bm, x, y)) / (2.0 * h);
}

}  // namespace

TEST_CASE("target spectrum") {
  Rng rng(1);
  const DenseMatrix flat = muonlab::build_target(12, 1.0, 10.0, rng);
  for (double s : oracle::singular_values(flat)) CHECK(s == Approx(10.0).epsilon(1e-9));
  Rng rng2(2);
  const DenseMatrix w = muonlab::build_target(20, 1e5, 10.0, rng2);
  const auto s = muonlab::singular_values(w);
  CHECK(s.front() == Approx(10.0).epsilon(1e-10));
  CHECK(s.back() == Approx(1e-4).epsilon(1e-6));
  CHECK(s.front() / s.back() == Approx(1e5).epsilon(1e-6));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] == Approx(10.0 * std::pow(1e5, -static_cast<double>(i) / 19.0)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(muonlab::build_target(1, 1.0, 1.0, rng), muonlab::DomainError);
}

TEST_CASE("asymmetric initialization") {
  FactorizationConfig cfg = small_cfg(200, 10);
  Rng rng(4);
  const auto f = muonlab::init_factors(cfg, rng);
  for (const DenseMatrix* m : {&f.a, &f.b}) {
    for (std::size_t j = 0; j < cfg.rank; ++j) {
      double ss = 0.0;
      for (std::size_t r = 0; r < cfg.dim; ++r) ss += (*m)(r, j) * (*m)(r, j);
      const double want = cfg.dim * (j < 2 ? 1e-4 : 1e-12);
      // Chi-squared with 200 degrees of freedom: 5 standard deviations.
      CHECK(std::abs(ss / want - 1.0) <= 5.0 * std::sqrt(2.0 / cfg.dim));
    }
  }
  const auto sv = muonlab::product_singular_values(f.a, f.b);
  CHECK(muonlab::effective_rank_of_spectrum(sv, cfg.dim).value == Approx(2.0).epsilon(0.05));
}

TEST_CASE("masked batches") {
  FactorizationConfig cfg = small_cfg(60, 4);
  cfg.batch = 4000;
  Rng trng(5);
  const DenseMatrix w = muonlab::build_target(60, 10.0, 10.0, trng);
  const DenseMatrix wt = w.transpose();
  Rng rng(6);
  const auto b = muonlab::sample_batch(cfg, wt, rng);
  std::vector<double> rate(60, 0.0);
  for (std::size_t r = 0; r < cfg.batch; ++r)
    for (std::size_t i = 0; i < 60; ++i) rate[i] += b.x(r, i) != 0.0 ? 1.0 : 0.0;
  CHECK(rate[0] == cfg.batch);
  const double p46 = std::exp(-0.05 * 46);
  CHECK(p46 == Approx(0.1003).epsilon(1e-3));
  CHECK(std::abs(rate[46] / cfg.batch - p46) <= 5.0 * std::sqrt(p46 * (1 - p46) / cfg.batch));
  double total = 0.0, want = 0.0;
  for (std::size_t i = 0; i < 60; ++i) {
    total += rate[i];
    want += std::exp(-0.05 * static_cast<double>(i));
  }
  CHECK(total / (cfg.batch * 60.0) == Approx(want / 60.0).epsilon(0.02));
  CHECK(oracle::rel_frobenius(b.y, oracle::matmul(b.x, wt)) <= 1e-13);
  cfg.mask_decay = 0.0;
  cfg.batch = 50;
  const auto full = muonlab::sample_batch(cfg, wt, rng);
  for (double v : full.x.entries()) CHECK(v != 0.0);
}

TEST_CASE("loss at the optimum and at the origin saddle") {
  const DenseMatrix a = oracle::gaussian(10, 3, 1);
  const DenseMatrix b = oracle::gaussian(10, 3, 2);
  const DenseMatrix x = oracle::gaussian(7, 10, 3);
  const DenseMatrix w = oracle::matmul(a, b.transpose());
  const DenseMatrix y = oracle::matmul(x, w.transpose());
  const auto at_opt = muonlab::loss_and_grads(a, b, x, y);
  CHECK(at_opt.loss <= 1e-25);
  CHECK(oracle::frobenius(at_opt.grad_a) <= 1e-12);
  CHECK(oracle::frobenius(at_opt.grad_b) <= 1e-12);
  const DenseMatrix z(10, 3);
  const auto origin = muonlab::loss_and_grads(z, z, x, y);
  CHECK(origin.loss == Approx(oracle::frobenius(y) * oracle::frobenius(y) / 14.0));
  CHECK(oracle::frobenius(origin.grad_a) == 0.0);
  CHECK(oracle::frobenius(origin.grad_b) == 0.0);
  CHECK(muonlab::loss_only(a, b, x, y) >= 0.0);
  CHECK_THROWS_AS(muonlab::loss_and_grads(a, b, x, z), muonlab::DomainError);
}

TEST_CASE("analytic gradients match central differences") {
  FactorizationConfig cfg = small_cfg(16, 4);
  Rng trng(10), irng(11), brng(12);
  const DenseMatrix wt = muonlab::build_target(16, 100.0, 10.0, trng).transpose();
  const DenseMatrix a = oracle::gaussian(16, 4, 13);
  const DenseMatrix b = oracle::gaussian(16, 4, 14);
  const auto batch = muonlab::sample_batch(cfg, wt, brng);
  const auto lg = muonlab::loss_and_grads(a, b, batch.x, batch.y);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const DenseMatrix dir = oracle::gaussian(16, 4, 100 + k);
    for (bool in_a : {true, false}) {
      const double analytic = muonlab::frobenius_inner(in_a ? lg.grad_a : lg.grad_b, dir);
      const double fd = fd_directional(a, b, batch.x, batch.y, dir, in_a, 1e-6);
      CHECK(std::abs(fd - analytic) <= 1e-6 * std::abs(analytic));
    }
  }
}

TEST_CASE("zero-step run records only the initial point") {
  FactorizationConfig cfg = small_cfg();
  cfg.steps = 0;
  const auto trace = muonlab::run_factorization(cfg, muonlab::default_factorization_optimizer(OptimizerKind::muon));
  REQUIRE(trace.points.size() == 1);
  CHECK(trace.points[0].step == 0);
  CHECK_FALSE(trace.diverged);
}

TEST_CASE("trace layout and determinism") {
  const FactorizationConfig cfg = small_cfg();
  for (OptimizerKind k : {OptimizerKind::muon, OptimizerKind::adamw}) {
    const auto opt = muonlab::default_factorization_optimizer(k);
    const auto t1 = muonlab::run_factorization(cfg, opt, 7);
    const auto t2 = muonlab::run_factorization(cfg, opt, 7);
    std::ostringstream a, b;
    muonlab::write_trace_csv(a, t1);
    muonlab::write_trace_csv(b, t2);
    CHECK(a.str() == b.str());
    std::vector<std::size_t> steps;
    for (const auto& p : t1.points) steps.push_back(p.step);
    CHECK(steps == std::vector<std::size_t>{0, 7, 14, 21, 28, 35, 40});
    const auto table = muonlab::parse_csv(a.str());
    CHECK(table.header == std::vector<std::string>{"step", "loss", "effective_rank", "sigma1"});
    for (std::size_t i = 1; i < t1.points.size(); ++i) CHECK(t1.points[i].step > t1.points[i - 1].step);
  }
}

TEST_CASE("trace metrics agree with direct computation") {
  const FactorizationConfig cfg = small_cfg();
  muonlab::FactorizationRun run(cfg, muonlab::default_factorization_optimizer(OptimizerKind::muon));
  for (int i = 0; i < 5; ++i) run.advance();
  const auto p = run.observe();
  const auto sv = oracle::singular_values(oracle::matmul(run.a(), run.b().transpose()));
  CHECK(p.sigma1 == Approx(sv[0]).epsilon(1e-9));
  CHECK(p.effective_rank == Approx(oracle::effective_rank(sv)).epsilon(1e-6));
  const auto batch = run.training_batch(5);
  CHECK(p.loss == Approx(muonlab::loss_only(run.a(), run.b(), batch.x, batch.y)));
}

TEST_CASE("probe draws never perturb training") {
  const FactorizationConfig cfg = small_cfg();
  const auto opt = muonlab::default_factorization_optimizer(OptimizerKind::adamw);
  muonlab::FactorizationRun plain(cfg, opt), probed(cfg, opt);
  for (int i = 0; i < 10; ++i) {
    plain.advance();
    (void)probed.probe_batch(i);
    (void)probed.observe();
    probed.advance();
  }
  CHECK(plain.a() == probed.a());
  CHECK(plain.b() == probed.b());
  CHECK_FALSE(probed.probe_batch(1).x == probed.training_batch(1).x);
}

TEST_CASE("muon ignition direction is invariant to the active scale") {
  FactorizationConfig cfg = small_cfg(32, 8);
  const auto opt = muonlab::default_factorization_optimizer(OptimizerKind::muon);
  FactorizationConfig doubled = cfg;
  doubled.active_var = 2.0 * cfg.active_var;
  muonlab::FactorizationRun r1(cfg, opt), r2(doubled, opt);
  const DenseMatrix a1 = r1.a(), a2 = r2.a();
  r1.advance();
  r2.advance();
  DenseMatrix d1 = r1.a() - a1, d2 = r2.a() - a2;
  const double cosine = muonlab::frobenius_inner(d1, d2) / (oracle::frobenius(d1) * oracle::frobenius(d2));
  CHECK(cosine >= 0.999);
}

TEST_CASE("config validation names the field") {
  FactorizationConfig cfg = small_cfg();
  cfg.rank = 100;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const muonlab::ConfigError& e) {
    CHECK(e.key() == "rank");
  }
  cfg = small_cfg();
  cfg.dim = 0;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const muonlab::ConfigError& e) {
    CHECK(e.key() == "dim");
  }
  const FactorizationConfig defaults;
  CHECK(defaults.rank == 64);
  CHECK(defaults.batch == 64);
  CHECK(defaults.steps == 5000);
  CHECK(defaults.mask_decay == 0.05);
  const auto m = muonlab::default_factorization_optimizer(OptimizerKind::muon);
  CHECK(m.muon.eta == 0.01);
  const auto w = muonlab::default_factorization_optimizer(OptimizerKind::adamw);
  CHECK(w.adamw.eta == 5e-4);
  CHECK(w.adamw.weight_decay == 0.01);
}
