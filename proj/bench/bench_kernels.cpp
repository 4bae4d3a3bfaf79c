// Copyright 2026 The dmatrack Authors
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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dmatrack/kernels.hpp"

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <auto Kernel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1);
  const auto b = random_vector(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <auto Kernel>
void BM_NearestRow(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kCols = 32;
  const auto db = random_vector(rows * kCols, 3);
  const auto q = random_vector(kCols, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(db, rows, kCols, q));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}

}  // namespace

BENCHMARK(BM_Matmul<dmatrack::kernels::matmul_serial>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_Matmul<dmatrack::kernels::matmul_omp>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_NearestRow<dmatrack::kernels::nearest_row_serial>)->Arg(1000)->Arg(100000);
BENCHMARK(BM_NearestRow<dmatrack::kernels::nearest_row_omp>)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
