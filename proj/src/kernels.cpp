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

#include "dmatrack/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>

#include <omp.h>

namespace dmatrack::kernels {

namespace {

inline void matmul_rows(const double* a, const double* b, double* c, std::size_t row_begin,
                        std::size_t row_end, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    double* ci = c + i * n;
    if (!accumulate) {
      std::fill(ci, ci + n, 0.0);
    }
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += aip * bp[j];
      }
    }
  }
}

inline void matmul_nt_rows(const double* a, const double* b, double* c, std::size_t row_begin,
                           std::size_t row_end, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        s += ai[p] * bj[p];
      }
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

inline void matmul_tn_rows(const double* a, const double* b, double* c, std::size_t row_begin,
                           std::size_t row_end, std::size_t m, std::size_t k, std::size_t n,
                           bool accumulate) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    double* ci = c + i * n;
    if (!accumulate) {
      std::fill(ci, ci + n, 0.0);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double api = a[p * m + i];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += api * bp[j];
      }
    }
  }
}

template <typename RowFn>
void parallel_rows(std::size_t m, RowFn&& fn) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    fn(static_cast<std::size_t>(i));
  }
}

}  // namespace

void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  matmul_rows(a.data(), b.data(), c.data(), 0, m, k, n, accumulate);
}

void matmul_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  parallel_rows(m, [&](std::size_t i) {
    matmul_rows(a.data(), b.data(), c.data(), i, i + 1, k, n, accumulate);
  });
}

void matmul_nt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  matmul_nt_rows(a.data(), b.data(), c.data(), 0, m, k, n, accumulate);
}

void matmul_nt_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  parallel_rows(m, [&](std::size_t i) {
    matmul_nt_rows(a.data(), b.data(), c.data(), i, i + 1, k, n, accumulate);
  });
}

void matmul_tn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  matmul_tn_rows(a.data(), b.data(), c.data(), 0, m, m, k, n, accumulate);
}

void matmul_tn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  parallel_rows(m, [&](std::size_t i) {
    matmul_tn_rows(a.data(), b.data(), c.data(), i, i + 1, m, k, n, accumulate);
  });
}

namespace {
bool use_parallel(std::size_t m, std::size_t k, std::size_t n) {
  return m > 1 && m * k * n >= kParallelThreshold && omp_get_max_threads() > 1;
}
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (use_parallel(m, k, n)) {
    matmul_omp(a, b, c, m, k, n, accumulate);
  } else {
    matmul_serial(a, b, c, m, k, n, accumulate);
  }
}

void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (use_parallel(m, k, n)) {
    matmul_nt_omp(a, b, c, m, k, n, accumulate);
  } else {
    matmul_nt_serial(a, b, c, m, k, n, accumulate);
  }
}

void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (use_parallel(m, k, n)) {
    matmul_tn_omp(a, b, c, m, k, n, accumulate);
  } else {
    matmul_tn_serial(a, b, c, m, k, n, accumulate);
  }
}

namespace {

double squared_distance(const double* row, const double* query, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = row[d] - query[d];
    s += diff * diff;
  }
  return s;
}

}  // namespace

std::size_t nearest_row_serial(std::span<const double> rows, std::size_t count, std::size_t dim,
                               std::span<const double> query) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < count; ++r) {
    const double d = squared_distance(rows.data() + r * dim, query.data(), dim);
    if (d < best_dist) {
      best_dist = d;
      best = r;
    }
  }
  return best;
}

std::size_t nearest_row_omp(std::span<const double> rows, std::size_t count, std::size_t dim,
                            std::span<const double> query) {
  std::pair<double, std::size_t> best{std::numeric_limits<double>::infinity(), 0};
#pragma omp parallel
  {
    std::pair<double, std::size_t> local{std::numeric_limits<double>::infinity(), 0};
#pragma omp for schedule(static) nowait
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(count); ++r) {
      const auto idx = static_cast<std::size_t>(r);
      const double d = squared_distance(rows.data() + idx * dim, query.data(), dim);
      if (d < local.first) {
        local = {d, idx};
      }
    }
#pragma omp critical
    {
      // Lexicographic (distance, index) keeps the lowest index on ties.
      if (local < best) {
        best = local;
      }
    }
  }
  return best.second;
}

}  // namespace dmatrack::kernels
