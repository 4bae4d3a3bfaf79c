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

#ifndef DMATRACK_RNG_HPP
#define DMATRACK_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace dmatrack {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a parent seed, a purpose tag and an index.
/// All randomness in the library flows through this so that every consumer
/// (noise, shuffles, initialization) is reproducible and decorrelated.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

/// Circularly-symmetric complex Gaussian with total variance `variance`.
inline std::complex<double> complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  const double re = dist(rng);
  const double im = dist(rng);
  return {s * re, s * im};
}

}  // namespace dmatrack

#endif  // DMATRACK_RNG_HPP
