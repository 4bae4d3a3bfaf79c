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

#ifndef DMATRACK_TESTS_TENSOR_OP_CASES_HPP
#define DMATRACK_TESTS_TENSOR_OP_CASES_HPP

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dmatrack/tensor.hpp"
#include "test_support.hpp"

namespace dmatrack::testing {

using OpFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct OpCase {
  std::vector<Shape> inputs;
  OpFn op;
  double lo = -2.0;
  double hi = 2.0;
};

// Projects an op's output onto fixed random weights so every output entry
// contributes a distinct amount to the scalar loss.
inline OpFn projected(OpFn op, std::uint64_t seed) {
  return [op, seed](const std::vector<Tensor>& in) {
    auto out = op(in);
    std::mt19937_64 rng(seed);
    auto w = Tensor::from_data(out.shape(), uniform_values(rng, out.numel()));
    return sum(mul(out, w));
  };
}

inline std::map<std::string, OpCase> op_cases() {
  std::map<std::string, OpCase> c;
  c["add"] = {{{3, 4}, {3, 4}}, [](const auto& t) { return add(t[0], t[1]); }};
  c["add scalar broadcast"] = {{{3, 4}, {1}}, [](const auto& t) { return add(t[0], t[1]); }};
  c["sub"] = {{{3, 4}, {3, 4}}, [](const auto& t) { return sub(t[0], t[1]); }};
  c["mul"] = {{{2, 5}, {2, 5}}, [](const auto& t) { return mul(t[0], t[1]); }};
  c["mul scalar broadcast"] = {{{1}, {2, 5}}, [](const auto& t) { return mul(t[0], t[1]); }};
  c["add_row"] = {{{3, 4}, {4}}, [](const auto& t) { return add_row(t[0], t[1]); }};
  c["scale"] = {{{6}}, [](const auto& t) { return scale(t[0], -1.7); }};
  c["add_scalar"] = {{{6}}, [](const auto& t) { return add_scalar(t[0], 0.3); }};
  c["matmul"] = {{{3, 4}, {4, 2}}, [](const auto& t) { return matmul(t[0], t[1]); }};
  c["transpose"] = {{{3, 4}}, [](const auto& t) { return transpose(t[0]); }};
  c["reshape"] = {{{3, 4}}, [](const auto& t) { return reshape(t[0], {2, 6}); }};
  c["slice rows"] = {{{5, 3}}, [](const auto& t) { return slice(t[0], 0, 1, 4); }};
  c["slice cols"] = {{{5, 3}}, [](const auto& t) { return slice(t[0], 1, 1, 3); }};
  c["concat rows"] = {{{2, 3}, {4, 3}}, [](const auto& t) { return concat({t[0], t[1]}, 0); }};
  c["concat cols"] = {{{2, 3}, {2, 1}}, [](const auto& t) { return concat({t[0], t[1]}, 1); }};
  c["softmax"] = {{{3, 5}}, [](const auto& t) { return softmax(t[0]); }};
  c["layer_norm"] = {{{3, 5}, {5}, {5}},
                     [](const auto& t) { return layer_norm(t[0], t[1], t[2]); }};
  c["gelu"] = {{{4, 3}}, [](const auto& t) { return gelu(t[0]); }};
  c["relu"] = {{{4, 3}}, [](const auto& t) { return relu(t[0]); }};
  c["sigmoid"] = {{{4, 3}}, [](const auto& t) { return sigmoid(t[0]); }};
  c["sqrt"] = {{{7}}, [](const auto& t) { return sqrt(t[0]); }, 0.2, 2.0};
  c["square"] = {{{7}}, [](const auto& t) { return square(t[0]); }};
  c["pow"] = {{{7}}, [](const auto& t) { return pow(t[0], 2.5); }, 0.2, 2.0};
  c["sum"] = {{{3, 3}}, [](const auto& t) { return sum(t[0]); }};
  c["mean"] = {{{3, 3}}, [](const auto& t) { return mean(t[0]); }};
  return c;
}

/// Fresh leaf inputs for one op case. relu inputs stay away from the kink.
inline std::vector<Tensor> op_case_inputs(const std::string& name, const OpCase& oc,
                                          std::mt19937_64& rng) {
  std::vector<Tensor> inputs;
  for (const auto& shape : oc.inputs) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    auto values = uniform_values(rng, n, oc.lo, oc.hi);
    if (name == "relu") {
      for (auto& v : values) v = std::abs(v) < 1e-3 ? 0.5 : v;
    }
    inputs.push_back(Tensor::from_data(shape, values, true));
  }
  return inputs;
}

}  // namespace dmatrack::testing

#endif  // DMATRACK_TESTS_TENSOR_OP_CASES_HPP
