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

#include <catch_amalgamated.hpp>

#include <omp.h>

#include "dmatrack/kernels.hpp"
#include "test_support.hpp"

using namespace dmatrack::kernels;
using dmatrack::testing::uniform_values;

namespace {

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("matmul variants agree bit for bit with the serial reference", "[kernels]") {
  ThreadCount threads(4);
  std::mt19937_64 rng(1);
  for (const auto& [m, k, n] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 1, 1},
                                {3, 5, 2}, {17, 9, 33}, {64, 48, 40}}) {
    const auto a = uniform_values(rng, m * k);
    const auto b = uniform_values(rng, k * n);
    const auto bt = uniform_values(rng, n * k);
    const auto at = uniform_values(rng, k * m);
    const auto seed_c = uniform_values(rng, m * n);
    for (bool accumulate : {false, true}) {
      auto c1 = seed_c;
      auto c2 = seed_c;
      auto c3 = seed_c;
      matmul_serial(a, b, c1, m, k, n, accumulate);
      matmul_omp(a, b, c2, m, k, n, accumulate);
      matmul(a, b, c3, m, k, n, accumulate);
      CHECK(c1 == c2);
      CHECK(c1 == c3);
      // Naive oracle.
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = accumulate ? seed_c[i * n + j] : 0.0;
          for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
          CHECK(std::abs(c1[i * n + j] - acc) < 1e-12);
        }
      }

      auto d1 = seed_c;
      auto d2 = seed_c;
      matmul_nt_serial(a, bt, d1, m, k, n, accumulate);
      matmul_nt_omp(a, bt, d2, m, k, n, accumulate);
      CHECK(d1 == d2);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = accumulate ? seed_c[i * n + j] : 0.0;
          for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * bt[j * k + p];
          CHECK(std::abs(d1[i * n + j] - acc) < 1e-12);
        }
      }

      auto e1 = seed_c;
      auto e2 = seed_c;
      matmul_tn_serial(at, b, e1, m, k, n, accumulate);
      matmul_tn_omp(at, b, e2, m, k, n, accumulate);
      CHECK(e1 == e2);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = accumulate ? seed_c[i * n + j] : 0.0;
          for (std::size_t p = 0; p < k; ++p) acc += at[p * m + i] * b[p * n + j];
          CHECK(std::abs(e1[i * n + j] - acc) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("nearest-row scan variants agree, including ties", "[kernels]") {
  ThreadCount threads(4);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> small(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t count = 1 + trial % 97;
    const std::size_t dim = 1 + trial % 5;
    std::vector<double> rows(count * dim);
    // Few distinct values force many exact ties.
    for (auto& v : rows) v = small(rng);
    std::vector<double> q(dim);
    for (auto& v : q) v = small(rng);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t r = 0; r < count; ++r) {
      double d = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d += (rows[r * dim + c] - q[c]) * (rows[r * dim + c] - q[c]);
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    CHECK(nearest_row_serial(rows, count, dim, q) == best);
    CHECK(nearest_row_omp(rows, count, dim, q) == best);
  }
}
