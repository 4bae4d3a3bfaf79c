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

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "dmatrack/errors.hpp"
#include "dmatrack/fingerprint.hpp"
#include "test_support.hpp"

using namespace dmatrack;
using testing::uniform_values;

namespace {

SimulationSetup tiny_setup(double noise_power) {
  SimulationSetup s;
  const double lambda = kSpeedOfLight / 28e9;
  s.geometry = DmaGeometry::uniform(2, 3, lambda);
  s.scene.wavelength = lambda;
  s.subcarrier_freqs = subcarrier_frequencies(28e9, 5e5, 3);
  s.n_paths = 4;
  s.noise_power = noise_power;
  return s;
}

std::size_t scan_oracle(const FingerprintDb& db, std::span<const double> q) {
  std::size_t best = 0;
  double best_d = 1e300;
  for (std::size_t r = 0; r < db.size(); ++r) {
    double d = 0.0;
    const auto row = db.rssi(r);
    for (std::size_t k = 0; k < q.size(); ++k) d += (row[k] - q[k]) * (row[k] - q[k]);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("RSSI is |y|^2, RFC-major", "[fingerprint]") {
  ReceivedSignal zero{2, 2, std::vector<cplx>(4)};
  for (double v : compute_rssi(zero)) CHECK(v == 0.0);
  ReceivedSignal one{2, 2, std::vector<cplx>(4)};
  one.samples[2] = {3.0, 4.0};
  const auto r = compute_rssi(one);
  CHECK(r[2] == 25.0);
  std::mt19937_64 rng(1);
  ReceivedSignal random{3, 4, {}};
  for (int k = 0; k < 12; ++k) random.samples.push_back(testing::random_complex(rng));
  const auto rr = compute_rssi(random);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t l = 0; l < 4; ++l) {
      const auto y = random.at(i, l);
      CHECK(rr[i * 4 + l] == y.real() * y.real() + y.imag() * y.imag());
    }
  }
  ReceivedSignal bad{2, 2, std::vector<cplx>(3)};
  CHECK_THROWS_AS(compute_rssi(bad), DimensionError);
}

TEST_CASE("query matches the exhaustive scan", "[fingerprint]") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    FingerprintDb db({2, 2, kFullPhase, 0.0}, 4);
    for (int r = 0; r < 100; ++r) {
      const auto v = uniform_values(rng, 4, 0.0, 1.0);
      db.add(v, {static_cast<double>(r), 0.0});
    }
    const auto q = uniform_values(rng, 4, 0.0, 1.0);
    CHECK(db.nearest(q) == scan_oracle(db, q));
    CHECK(db.query(q) == db.position(scan_oracle(db, q)));
  }

  FingerprintDb db({1, 2, kFullPhase, 0.0}, 2);
  for (int r = 0; r < 10; ++r) db.add(std::vector<double>{r * 1.0, r * 2.0}, {r * 1.0, 0.0});
  db.add(std::vector<double>{7.0, 14.0}, {99.0, 99.0});
  CHECK(db.nearest(std::vector<double>{7.0, 14.0}) == 7);  // duplicate resolves to the lower index
  CHECK(db.query(db.rssi(3)) == Vec2{3.0, 0.0});

  FingerprintDb single({1, 1, kFullPhase, 0.0}, 1);
  single.add(std::vector<double>{5.0}, {1.0, 2.0});
  CHECK(single.query(std::vector<double>{-100.0}) == Vec2{1.0, 2.0});

  FingerprintDb empty({1, 1, kFullPhase, 0.0}, 1);
  CHECK_THROWS_AS(empty.query(std::vector<double>{1.0}), StateError);
  CHECK_THROWS_AS(single.query(std::vector<double>{1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(single.add(std::vector<double>{1.0, 2.0}, {}), DimensionError);
}

TEST_CASE("query is invariant to record order", "[fingerprint][property]") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < 50; ++r) rows.push_back(uniform_values(rng, 3));
  std::vector<std::size_t> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  FingerprintDb a({1, 3, kFullPhase, 0.0}, 3);
  FingerprintDb b({1, 3, kFullPhase, 0.0}, 3);
  for (std::size_t r = 0; r < 50; ++r) {
    a.add(rows[r], {static_cast<double>(r), 0.0});
    b.add(rows[order[r]], {static_cast<double>(order[r]), 0.0});
  }
  for (int k = 0; k < 100; ++k) {
    const auto q = uniform_values(rng, 3);
    CHECK(a.query(q) == b.query(q));
  }
}

TEST_CASE("database built from a dataset", "[fingerprint]") {
  const auto setup = tiny_setup(0.0);
  const auto ds = make_dataset(setup, 4, 5, 8);
  const std::vector<std::size_t> train{0, 2};
  const auto db = build_db(setup, ds, train);
  CHECK(db.size() == 10);
  CHECK(db.vector_length() == 2 * 3);
  CHECK(db.metadata().probe_phase == kFullPhase);

  // Noiseless: querying a training position returns that position.
  for (const auto d : train) {
    for (const auto& pos : ds.trajectories[d].trajectory.positions) {
      const auto rssi = measure_rssi(setup, pos, ds.environment_seed, 123);
      CHECK(db.query(rssi) == pos);
    }
  }
  const auto p = ds.trajectories[1].trajectory.positions[0];
  CHECK(measure_rssi(setup, p, ds.environment_seed, 1) == measure_rssi(setup, p, ds.environment_seed, 2));

  const auto noisy = tiny_setup(1e-9);
  CHECK(measure_rssi(noisy, p, ds.environment_seed, 1) == measure_rssi(noisy, p, ds.environment_seed, 1));
  CHECK(measure_rssi(noisy, p, ds.environment_seed, 1) != measure_rssi(noisy, p, ds.environment_seed, 2));
  CHECK_THROWS_AS(build_db(setup, ds, std::vector<std::size_t>{}), DomainError);
}

TEST_CASE("database file round-trip", "[fingerprint]") {
  std::mt19937_64 rng(4);
  FingerprintDb db({3, 2, 0.7, 1e-9}, 6);
  for (int r = 0; r < 20; ++r) db.add(uniform_values(rng, 6), {0.2 * r, 0.4 * r});
  const auto path = std::filesystem::temp_directory_path() / "dmatrack_test_fp.db";
  db.save(path);
  const auto back = FingerprintDb::load(path);
  CHECK(back.size() == 20);
  CHECK(back.vector_length() == 6);
  CHECK(back.metadata().n_rf == 3);
  CHECK(back.metadata().n_subcarriers == 2);
  CHECK(back.metadata().probe_phase == 0.7);
  CHECK(back.metadata().noise_power == 1e-9);
  for (std::size_t r = 0; r < 20; ++r) {
    CHECK(std::vector<double>(back.rssi(r).begin(), back.rssi(r).end()) ==
          std::vector<double>(db.rssi(r).begin(), db.rssi(r).end()));
    CHECK(back.position(r) == db.position(r));
  }
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
  CHECK_THROWS_AS(FingerprintDb::load(path), FormatError);
  std::filesystem::remove(path);
}
