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


// Serial reference kernels against the OpenMP kernels. Run with
// OMP_NUM_THREADS unset to use every core in the parallel variants.

#include <benchmark/benchmark.h>

#include <vector>

#include "muonlab/kernels.hpp"
#include "muonlab/rng.hpp"
#include "muonlab/spectral.hpp"

namespace {

using muonlab::DenseMatrix;

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  DenseMatrix m(rows, cols);
  muonlab::Rng rng(seed);
  rng.fill_normal(m.entries());
  return m;
}

void BM_MatmulReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 1);
  const DenseMatrix b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(muonlab::reference::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 1);
  const DenseMatrix b = random_matrix(n, n, 2);
  muonlab::set_num_threads(0);
  for (auto _ : state) benchmark::DoNotOptimize(muonlab::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

void BM_NewtonSchulzReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DenseMatrix x = random_matrix(n, n, 3);
  x *= 1.0 / muonlab::frobenius_norm(x);
  for (auto _ : state) benchmark::DoNotOptimize(muonlab::newton_schulz_reference(x));
}

void BM_NewtonSchulzParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DenseMatrix x = random_matrix(n, n, 3);
  x *= 1.0 / muonlab::frobenius_norm(x);
  muonlab::set_num_threads(0);
  for (auto _ : state) benchmark::DoNotOptimize(muonlab::newton_schulz(x));
}

void BM_FillNormalSequential(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  muonlab::Rng rng(4);
  for (auto _ : state) {
    for (double& v : out) v = rng.normal();
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FillNormalParallel(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  muonlab::Rng rng(4);
  muonlab::set_num_threads(0);
  for (auto _ : state) {
    rng.fill_normal(out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_MatmulReference)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulParallel)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NewtonSchulzReference)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NewtonSchulzParallel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FillNormalSequential)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_FillNormalParallel)->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
