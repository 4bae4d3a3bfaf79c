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

#include <cmath>
#include <map>
#include <numbers>

#include "dmatrack/errors.hpp"
#include "dmatrack/tensor.hpp"
#include "tensor_op_cases.hpp"
#include "test_support.hpp"

using namespace dmatrack;
using Catch::Approx;
using testing::max_gradient_error;
using testing::op_cases;
using testing::projected;
using testing::uniform_values;

TEST_CASE("every op matches central finite differences", "[tensor][property]") {
  std::mt19937_64 rng(17);
  for (const auto& [name, oc] : op_cases()) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto inputs = testing::op_case_inputs(name, oc, rng);
      INFO(name);
      CHECK(max_gradient_error(inputs, projected(oc.op, rng())) < 1e-4);
    }
  }
}

TEST_CASE("op forward examples", "[tensor]") {
  const auto s = softmax(Tensor::from_data({3}, {0.0, 0.0, 0.0}));
  for (double v : s.data()) CHECK(v == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);

  std::mt19937_64 rng(2);
  const auto av = uniform_values(rng, 6);
  const auto bv = uniform_values(rng, 6);
  const auto c = matmul(Tensor::from_data({2, 3}, av), Tensor::from_data({3, 2}, bv));
  REQUIRE(c.shape() == Shape{2, 2});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += av[i * 3 + k] * bv[k * 2 + j];
      CHECK(c.data()[i * 2 + j] == Approx(acc).epsilon(1e-14));
    }
  }

  const auto g = gelu(Tensor::from_data({2}, {1.0, -0.5}));
  CHECK(g.data()[0] == Approx(0.5 * (1.0 + std::erf(1.0 / std::numbers::sqrt2))).epsilon(1e-14));
  CHECK(g.data()[1] == Approx(-0.25 * (1.0 + std::erf(-0.5 / std::numbers::sqrt2))).epsilon(1e-14));
  CHECK(relu(Tensor::from_data({2}, {-1.0, 2.0})).data()[0] == 0.0);
  CHECK(pow(Tensor::scalar(4.0), 1.5).item() == Approx(8.0));
  CHECK(mean(Tensor::from_data({4}, {1, 2, 3, 6})).item() == 3.0);
  const auto t = transpose(Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6}));
  CHECK(std::vector<double>(t.data().begin(), t.data().end()) == std::vector<double>{1, 4, 2, 5, 3, 6});
  const auto cc = concat({Tensor::from_data({1, 2}, {1, 2}), Tensor::from_data({1, 1}, {3})}, 1);
  CHECK(std::vector<double>(cc.data().begin(), cc.data().end()) == std::vector<double>{1, 2, 3});
}

TEST_CASE("softmax and layer_norm invariants", "[tensor][property]") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = Tensor::from_data({4, 7}, uniform_values(rng, 28, -10.0, 10.0));
    const auto s = softmax(x);
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (std::size_t k = 0; k < 7; ++k) {
        CHECK(s.data()[r * 7 + k] >= 0.0);
        total += s.data()[r * 7 + k];
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
    const auto ln = layer_norm(x, Tensor::full({7}, 1.0), Tensor::zeros({7}));
    for (std::size_t r = 0; r < 4; ++r) {
      double m = 0.0;
      double v = 0.0;
      for (std::size_t k = 0; k < 7; ++k) m += ln.data()[r * 7 + k];
      m /= 7.0;
      for (std::size_t k = 0; k < 7; ++k) v += std::pow(ln.data()[r * 7 + k] - m, 2);
      v /= 7.0;
      CHECK(std::abs(m) < 1e-6);
      // The epsilon inside the root shrinks the variance to var / (var + eps).
      double raw_m = 0.0;
      double raw_v = 0.0;
      for (std::size_t k = 0; k < 7; ++k) raw_m += x.data()[r * 7 + k];
      raw_m /= 7.0;
      for (std::size_t k = 0; k < 7; ++k) raw_v += std::pow(x.data()[r * 7 + k] - raw_m, 2);
      raw_v /= 7.0;
      CHECK(v == Approx(raw_v / (raw_v + 1e-5)).epsilon(1e-12));
    }
    // Rows with variance far above eps come out at unit variance.
    const auto wide = x.data();
    std::vector<double> scaled(wide.begin(), wide.end());
    for (double& s_v : scaled) s_v *= 100.0;
    const auto lw = layer_norm(Tensor::from_data({4, 7}, scaled), Tensor::full({7}, 1.0), Tensor::zeros({7}));
    for (std::size_t r = 0; r < 4; ++r) {
      double m = 0.0;
      double v = 0.0;
      for (std::size_t k = 0; k < 7; ++k) m += lw.data()[r * 7 + k];
      m /= 7.0;
      for (std::size_t k = 0; k < 7; ++k) v += std::pow(lw.data()[r * 7 + k] - m, 2);
      v /= 7.0;
      CHECK(std::abs(m) < 1e-6);
      CHECK(std::abs(v - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("shape errors name both shapes", "[tensor]") {
  const auto a = Tensor::zeros({2, 3});
  const auto b = Tensor::zeros({3, 3});
  CHECK_THROWS_WITH(add(a, b), Catch::Matchers::ContainsSubstring("[2,3]") &&
                                   Catch::Matchers::ContainsSubstring("[3,3]"));
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
  CHECK_THROWS_WITH(matmul(a, a), Catch::Matchers::ContainsSubstring("[2,3]"));
  CHECK_THROWS_AS(add_row(a, Tensor::zeros({2})), DimensionError);
  CHECK_THROWS_AS(reshape(a, {4, 2}), DimensionError);
  CHECK_THROWS_AS(slice(a, 0, 1, 3), DimensionError);
  CHECK_THROWS_AS(concat({a, Tensor::zeros({2, 2})}, 0), DimensionError);
  CHECK_THROWS_AS(layer_norm(a, Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0}), DimensionError);
  CHECK_THROWS_AS(softmax(Tensor::zeros({2, 0})), DimensionError);
}

TEST_CASE("backward examples", "[tensor]") {
  auto x = Tensor::scalar(3.0, true);
  square(x).backward();
  CHECK(x.grad()[0] == 6.0);

  std::mt19937_64 rng(6);
  auto a = Tensor::from_data({2, 3}, uniform_values(rng, 6), true);
  auto b = Tensor::from_data({2, 3}, uniform_values(rng, 6), true);
  sum(mul(a, b)).backward();
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(a.grad()[k] == b.data()[k]);
    CHECK(b.grad()[k] == a.data()[k]);
  }
}

TEST_CASE("fan-out accumulates every path", "[tensor]") {
  auto x = Tensor::from_data({3}, {1.0, -2.0, 0.5}, true);
  // y = sum(x*x) + sum(3x) + sum(x): the three consumers of x must add up.
  auto y = add(add(sum(mul(x, x)), sum(scale(x, 3.0))), sum(x));
  y.backward();
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(x.grad()[k] == Approx(2.0 * x.data()[k] + 4.0).epsilon(1e-15));
  }
  // A shared intermediate consumed twice.
  auto w = Tensor::from_data({2}, {0.3, 0.7}, true);
  auto h = sigmoid(w);
  auto z = add(sum(square(h)), sum(h));
  z.backward();
  for (std::size_t k = 0; k < 2; ++k) {
    const double s = 1.0 / (1.0 + std::exp(-w.data()[k]));
    CHECK(w.grad()[k] == Approx((2.0 * s + 1.0) * s * (1.0 - s)).epsilon(1e-14));
  }
}

TEST_CASE("backward state errors", "[tensor]") {
  auto x = Tensor::from_data({2}, {1.0, 2.0}, true);
  auto y = sum(square(x));
  y.backward();
  CHECK_THROWS_AS(y.backward(), StateError);
  y.reset_graph();
  x.clear_grad();
  CHECK_NOTHROW(y.backward());
  CHECK(x.grad()[1] == 4.0);
  CHECK_THROWS_AS(square(x).backward(), DimensionError);
  CHECK_THROWS_AS(sum(Tensor::zeros({2})).backward(), StateError);
}

TEST_CASE("three-layer MLP gradient", "[tensor][property]") {
  std::mt19937_64 rng(8);
  std::vector<Tensor> p{
      Tensor::from_data({4, 6}, uniform_values(rng, 24, -1.0, 1.0), true),
      Tensor::from_data({6}, uniform_values(rng, 6, -1.0, 1.0), true),
      Tensor::from_data({6, 5}, uniform_values(rng, 30, -1.0, 1.0), true),
      Tensor::from_data({5}, uniform_values(rng, 5, -1.0, 1.0), true),
      Tensor::from_data({5, 1}, uniform_values(rng, 5, -1.0, 1.0), true)};
  const auto input = Tensor::from_data({3, 4}, uniform_values(rng, 12));
  const auto loss = [&input](const std::vector<Tensor>& q) {
    auto h1 = gelu(add_row(matmul(input, q[0]), q[1]));
    auto h2 = sigmoid(add_row(matmul(h1, q[2]), q[3]));
    return mean(square(matmul(h2, q[4])));
  };
  CHECK(max_gradient_error(p, loss) < 1e-4);
}

TEST_CASE("sgd_step", "[tensor]") {
  std::vector<Tensor> p{Tensor::scalar(1.0, true)};
  p[0].mutable_grad()[0] = 2.0;
  sgd_step(p, 0.1);
  CHECK(p[0].item() == Approx(0.8).epsilon(1e-15));
  CHECK_FALSE(p[0].has_grad());
  CHECK_THROWS_AS(sgd_step(p, 0.1), StateError);

  p[0].mutable_grad()[0] = 5.0;
  sgd_step(p, 0.0);
  CHECK(p[0].item() == Approx(0.8).epsilon(1e-15));

  std::vector<Tensor> x{Tensor::scalar(1.0, true)};
  for (int step = 0; step < 50; ++step) {
    square(x[0]).backward();
    sgd_step(x, 0.4);
  }
  CHECK(std::abs(x[0].item()) < 1e-4);
}

TEST_CASE("ops without grad inputs record no graph", "[tensor]") {
  const auto a = Tensor::from_data({2}, {1.0, 2.0});
  const auto b = add(a, a);
  CHECK_FALSE(b.requires_grad());
  CHECK(b.node()->inputs.empty());
  const auto d = Tensor::from_data({2}, {1.0, 2.0}, true).detach();
  CHECK_FALSE(d.requires_grad());
}
