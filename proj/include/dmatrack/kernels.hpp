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

#ifndef DMATRACK_KERNELS_HPP
#define DMATRACK_KERNELS_HPP

#include <cstddef>
#include <span>

// Dense inner loops. Every kernel has a serial reference and an OpenMP
// variant; the OpenMP variant partitions output rows only, so both produce
// bit-identical results and the serial one stays as the test oracle.
namespace dmatrack::kernels {

// c[m,n] (+)= a[m,k] * b[k,n]
void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                std::size_t m, std::size_t k, std::size_t n, bool accumulate);

// c[m,n] (+)= a[m,k] * b[n,k]^T
void matmul_nt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_nt_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate);

// c[m,n] (+)= a[k,m]^T * b[k,n]
void matmul_tn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_tn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n, bool accumulate);

// Size-based dispatch used by the autograd engine.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
               std::size_t m, std::size_t k, std::size_t n, bool accumulate);

/// Index of the row of `rows` (count x dim, row-major) closest to `query` in
/// Euclidean distance. Ties resolve to the lowest index.
std::size_t nearest_row_serial(std::span<const double> rows, std::size_t count, std::size_t dim,
                               std::span<const double> query);
std::size_t nearest_row_omp(std::span<const double> rows, std::size_t count, std::size_t dim,
                            std::span<const double> query);

/// Work (multiply-adds) above which the dispatchers switch to OpenMP.
inline constexpr std::size_t kParallelThreshold = 1 << 16;

}  // namespace dmatrack::kernels

#endif  // DMATRACK_KERNELS_HPP
