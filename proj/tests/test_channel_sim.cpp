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
#include <numbers>

#include "dmatrack/channel_sim.hpp"
#include "dmatrack/errors.hpp"
#include "test_support.hpp"

using namespace dmatrack;
using Catch::Approx;
using std::numbers::pi;

namespace {

const double kLambda = kSpeedOfLight / 28e9;

double correlation(const ChannelTensor& a, const ChannelTensor& b) {
  cplx inner{0.0, 0.0};
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    inner += std::conj(a.entries[k]) * b.entries[k];
    na += std::norm(a.entries[k]);
    nb += std::norm(b.entries[k]);
  }
  return std::abs(inner) / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("steering vector examples", "[channel]") {
  const auto g = DmaGeometry::uniform(3, 4, kLambda);
  for (const auto& a : steering_vector(g, 0.0, 0.0)) {
    CHECK(a == cplx(1.0, 0.0));
  }
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const auto angles = testing::uniform_values(rng, 2, -pi, pi);
    for (const auto& a : steering_vector(g, angles[0], angles[1])) {
      CHECK(std::abs(a) == Approx(1.0).epsilon(1e-14));
    }
  }
  const auto row = DmaGeometry::uniform(1, 2, kLambda);
  const auto a = steering_vector(row, pi / 2, 0.0);
  CHECK(a[0] == cplx(1.0, 0.0));
  CHECK(a[1].real() == Approx(-1.0).epsilon(1e-14));
  CHECK(a[1].imag() == Approx(0.0).margin(1e-14));

  // Vertical neighbour (next RF row) sits lambda/2 higher.
  const auto column = DmaGeometry::uniform(2, 1, kLambda);
  const auto up = steering_vector(column, 0.3, pi / 2);
  CHECK(std::abs(up[1] + up[0]) < 1e-12);
}

TEST_CASE("synth_channel examples and superposition", "[channel]") {
  const auto g = DmaGeometry::uniform(2, 3, kLambda);
  const std::vector<double> freqs{28e9, 28.001e9};
  const auto ones = synth_channel(g, {{cplx(1.0, 0.0), 0.0, 0.0, 0.0}}, freqs);
  for (const auto& h : ones.entries) CHECK(h == cplx(1.0, 0.0));

  const PathParams p{cplx(0.3, -0.2), 0.4, 0.1, 1e-7};
  auto q = p;
  q.gain = -p.gain;
  for (const auto& h : synth_channel(g, {p, q}, freqs).entries) {
    CHECK(std::abs(h) < 1e-15);
  }

  std::mt19937_64 rng(2);
  std::vector<PathParams> paths;
  for (int m = 0; m < 3; ++m) {
    const auto v = testing::uniform_values(rng, 3, -1.0, 1.0);
    paths.push_back({testing::random_complex(rng), v[0], v[1], 1e-7 * (v[2] + 1.0)});
  }
  const auto total = synth_channel(g, paths, freqs);
  std::vector<cplx> sum(total.entries.size());
  for (const auto& path : paths) {
    const auto part = synth_channel(g, {path}, freqs);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += part.entries[k];
  }
  for (std::size_t k = 0; k < sum.size(); ++k) {
    CHECK(std::abs(total.entries[k] - sum[k]) < 1e-14);
  }
  CHECK_THROWS_AS(synth_channel(g, {}, freqs), DomainError);
}

TEST_CASE("subcarrier frequencies", "[channel]") {
  const auto f = subcarrier_frequencies(28e9, 4e5, 4);
  REQUIRE(f.size() == 4);
  // Offsets are centred on the carrier with spacing B / L.
  CHECK(f[0] == Approx(28e9 - 1.5e5).epsilon(1e-15));
  for (std::size_t k = 1; k < f.size(); ++k) {
    CHECK(f[k] - f[k - 1] == Approx(1e5).epsilon(1e-6));
  }
  CHECK((f[0] + f[3]) / 2.0 == Approx(28e9).epsilon(1e-15));
  CHECK_THROWS_AS(subcarrier_frequencies(28e9, 4e5, 0), DomainError);
}

TEST_CASE("image-method paths", "[channel]") {
  Scene scene;
  CHECK(scene.available_paths() == 6);
  const Vec2 pos{5.0, 3.0};
  const auto a = paths_for_position(scene, pos, 6, 42);
  const auto b = paths_for_position(scene, pos, 6, 42);
  REQUIRE(a.size() == 6);
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(a[m].gain == b[m].gain);
    CHECK(a[m].delay == b[m].delay);
    CHECK(std::abs(a[m].gain) > 0.0);
    CHECK(a[m].delay > 0.0);
    CHECK(std::abs(a[m].azimuth) <= pi);
    CHECK(std::abs(a[m].elevation) <= pi);
  }
  const auto moved = paths_for_position(scene, {5.2, 3.0}, 6, 42);
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(std::abs(moved[m].delay - a[m].delay) < 2.0 * 0.2 / kSpeedOfLight);
  }
  CHECK_THROWS_WITH(paths_for_position(scene, pos, 7, 1), Catch::Matchers::ContainsSubstring("1..6"));
  CHECK_THROWS_AS(paths_for_position(scene, pos, 0, 1), DomainError);
  CHECK_THROWS_AS(paths_for_position(scene, {-1.0, 3.0}, 1, 1), DomainError);

  Scene one = scene;
  one.walls = {{{-3.0, 0.0}, {1.0, 0.0}}};
  CHECK(one.available_paths() == 1);
  const auto single = paths_for_position(one, pos, 1, 7);
  REQUIRE(single.size() == 1);
  // Specular point on the wall x = -3 by hand: unfold along x and split the
  // straight line in proportion to the horizontal offsets.
  const double dx_user = pos.x + 3.0;
  const double dx_dma = scene.dma_position.x + 3.0;
  const double dy = scene.dma_position.y - pos.y;
  const double dz = scene.dma_position.z - scene.area.height;
  const double frac = dx_user / (dx_user + dx_dma);
  const Vec3 hit{-3.0, pos.y + frac * dy, scene.area.height + frac * dz};
  const double d1 = std::sqrt(std::pow(pos.x - hit.x, 2) + std::pow(pos.y - hit.y, 2) +
                              std::pow(scene.area.height - hit.z, 2));
  const double d2 =
      std::sqrt(std::pow(scene.dma_position.x - hit.x, 2) + std::pow(scene.dma_position.y - hit.y, 2) +
                std::pow(scene.dma_position.z - hit.z, 2));
  CHECK(single[0].delay == Approx((d1 + d2) / kSpeedOfLight).epsilon(1e-12));
}

TEST_CASE("spatial correlation decays with distance", "[channel][property]") {
  Scene scene;
  const auto g = DmaGeometry::uniform(4, 4, kLambda);
  const auto freqs = subcarrier_frequencies(28e9, 5e5, 4);
  double near = 0.0;
  double far = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto h0 = synth_channel(g, paths_for_position(scene, {1.0, 4.0}, 3, seed), freqs);
    const auto h1 = synth_channel(g, paths_for_position(scene, {1.2, 4.0}, 3, seed), freqs);
    const auto h2 = synth_channel(g, paths_for_position(scene, {21.0, 4.0}, 3, seed), freqs);
    near += correlation(h0, h1);
    far += correlation(h0, h2);
  }
  CHECK(near > far);
}

TEST_CASE("grid snapping", "[channel]") {
  AreaGrid area;
  const auto s = area.snap({1.07, 2.11});
  CHECK(s.x == Approx(1.0).epsilon(1e-12));
  CHECK(s.y == Approx(2.2).epsilon(1e-12));
  CHECK(area.snap(s) == s);
  CHECK(area.on_grid(s));
  CHECK(area.snap({-5.0, 100.0}) == Vec2{0.0, 8.0});
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto v = testing::uniform_values(rng, 2, -1.0, 25.0);
    const auto once = area.snap({v[0], v[1]});
    CHECK(area.snap(once) == once);
  }
  AreaGrid tiny{0.0, 0.1, 0.0, 0.1, 0.2, 2.0};
  CHECK_THROWS_AS(tiny.validate(), DomainError);
}

TEST_CASE("Bezier evaluation", "[channel]") {
  const std::array<Vec2, 5> cp{Vec2{0, 0}, Vec2{1, 2}, Vec2{3, 3}, Vec2{4, 1}, Vec2{6, 0}};
  CHECK(bezier_point(cp, 0.0) == cp[0]);
  CHECK(bezier_point(cp, 1.0) == cp[4]);
  const std::array<Vec2, 5> same{Vec2{2, 5}, Vec2{2, 5}, Vec2{2, 5}, Vec2{2, 5}, Vec2{2, 5}};
  for (double s : {0.1, 0.37, 0.5, 0.93}) {
    const auto p = bezier_point(same, s);
    CHECK(p.x == Approx(2.0).epsilon(1e-14));
    CHECK(p.y == Approx(5.0).epsilon(1e-14));
  }
  // Bernstein oracle at s = 0.3.
  const double s = 0.3;
  const double w[5] = {std::pow(1 - s, 4), 4 * s * std::pow(1 - s, 3), 6 * s * s * std::pow(1 - s, 2),
                       4 * std::pow(s, 3) * (1 - s), std::pow(s, 4)};
  Vec2 want;
  for (int k = 0; k < 5; ++k) {
    want.x += w[k] * cp[k].x;
    want.y += w[k] * cp[k].y;
  }
  CHECK(bezier_point(cp, s).x == Approx(want.x).epsilon(1e-14));
  CHECK(bezier_point(cp, s).y == Approx(want.y).epsilon(1e-14));
  CHECK_THROWS_AS(bezier_point(cp, 1.01), DomainError);
  CHECK_THROWS_AS(bezier_point(cp, -0.01), DomainError);
}

TEST_CASE("trajectory generation", "[channel]") {
  AreaGrid area;
  const auto t = gen_trajectory(area, 50, 9);
  REQUIRE(t.positions.size() == 50);
  for (const auto& p : t.positions) CHECK(area.on_grid(p));
  const auto again = gen_trajectory(area, 50, 9);
  CHECK(again.positions == t.positions);
  CHECK(gen_trajectory(area, 50, 10).positions != t.positions);

  const auto two = gen_trajectory(area, 2, 4);
  CHECK(two.positions.front() == area.snap(two.control_points.front()));
  CHECK(two.positions.back() == area.snap(two.control_points.back()));

  // Fixed arc step: consecutive raw points are 0.5 m apart along the curve,
  // so snapped neighbours cannot be farther than 0.5 m plus a grid diagonal.
  const auto stepped = gen_trajectory(area, 40, 4, 0.5);
  REQUIRE(stepped.positions.size() == 40);
  for (std::size_t k = 1; k < stepped.positions.size(); ++k) {
    CHECK(distance(stepped.positions[k], stepped.positions[k - 1]) <=
          0.5 + std::sqrt(2.0) * area.spacing + 1e-9);
  }
  CHECK_THROWS_AS(gen_trajectory(area, 1, 4), DomainError);
}
