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

#ifndef DMATRACK_TESTS_TEST_SUPPORT_HPP
#define DMATRACK_TESTS_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "dmatrack/tensor.hpp"

namespace dmatrack::testing {

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                                          double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline std::complex<double> random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng)};
}

/// |a - b| / max(|a|, |b|, floor); the floor keeps near-zero gradients from
/// inflating the ratio.
inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest relative error between the autograd gradient of `loss` and central
/// finite differences, over every entry of every input.
inline double max_gradient_error(std::vector<Tensor> inputs,
                                 const std::function<Tensor(const std::vector<Tensor>&)>& loss,
                                 double h = 1e-5) {
  auto out = loss(inputs);
  out.backward();
  double worst = 0.0;
  for (auto& input : inputs) {
    const std::vector<double> analytic(input.grad().begin(), input.grad().end());
    auto values = input.mutable_data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + h;
      const double up = loss(inputs).item();
      values[k] = saved - h;
      const double down = loss(inputs).item();
      values[k] = saved;
      worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace dmatrack::testing

#endif  // DMATRACK_TESTS_TEST_SUPPORT_HPP
