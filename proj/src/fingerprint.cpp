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

#include "dmatrack/fingerprint.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/kernels.hpp"
#include "dmatrack/rng.hpp"

namespace dmatrack {

std::vector<double> compute_rssi(const ReceivedSignal& signal) {
  if (signal.samples.size() != signal.n_rf * signal.n_subcarriers) {
    throw DimensionError("compute_rssi: expected " +
                         std::to_string(signal.n_rf * signal.n_subcarriers) + " samples, got " +
                         std::to_string(signal.samples.size()));
  }
  std::vector<double> out(signal.samples.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::norm(signal.samples[k]);
  }
  return out;
}

FingerprintDb::FingerprintDb(FingerprintMetadata metadata, std::size_t vector_length)
    : metadata_(metadata), vector_length_(vector_length) {}

void FingerprintDb::add(std::span<const double> rssi, const Vec2& position) {
  if (rssi.size() != vector_length_) {
    throw DimensionError("FingerprintDb::add: vector of length " + std::to_string(rssi.size()) +
                         ", db expects " + std::to_string(vector_length_));
  }
  records_.insert(records_.end(), rssi.begin(), rssi.end());
  positions_.push_back(position);
}

std::span<const double> FingerprintDb::rssi(std::size_t record) const {
  return std::span(records_).subspan(record * vector_length_, vector_length_);
}

std::size_t FingerprintDb::nearest(std::span<const double> rssi) const {
  if (positions_.empty()) {
    throw StateError("FingerprintDb::query: database is empty");
  }
  if (rssi.size() != vector_length_) {
    throw DimensionError("FingerprintDb::query: vector of length " + std::to_string(rssi.size()) +
                         ", db expects " + std::to_string(vector_length_));
  }
  if (size() * vector_length_ >= kernels::kParallelThreshold) {
    return kernels::nearest_row_omp(records_, size(), vector_length_, rssi);
  }
  return kernels::nearest_row_serial(records_, size(), vector_length_, rssi);
}

Vec2 FingerprintDb::query(std::span<const double> rssi) const { return positions_[nearest(rssi)]; }

void FingerprintDb::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  std::ostringstream header;
  header.precision(17);
  header << "dmatrack-fingerprint-db 1\n"
         << "vector_length " << vector_length_ << "\n"
         << "records " << size() << "\n"
         << "n_rf " << metadata_.n_rf << "\n"
         << "n_subcarriers " << metadata_.n_subcarriers << "\n"
         << "probe_phase " << metadata_.probe_phase << "\n"
         << "noise_power " << metadata_.noise_power << "\n"
         << "end\n";
  out << header.str();
  for (std::size_t r = 0; r < size(); ++r) {
    io::write_f64s(out, rssi(r));
    io::write_f64(out, positions_[r].x);
    io::write_f64(out, positions_[r].y);
  }
}

FingerprintDb FingerprintDb::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  if (line != "dmatrack-fingerprint-db 1") {
    throw FormatError("fingerprint db: bad header");
  }
  FingerprintMetadata meta;
  std::size_t length = 0;
  std::size_t count = 0;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "vector_length") {
      ls >> length;
    } else if (key == "records") {
      ls >> count;
    } else if (key == "n_rf") {
      ls >> meta.n_rf;
    } else if (key == "n_subcarriers") {
      ls >> meta.n_subcarriers;
    } else if (key == "probe_phase") {
      ls >> meta.probe_phase;
    } else if (key == "noise_power") {
      ls >> meta.noise_power;
    } else {
      throw FormatError("fingerprint db: unknown header key '" + key + "'");
    }
  }
  if (line != "end") {
    throw FormatError("fingerprint db: truncated header");
  }
  FingerprintDb db(meta, length);
  for (std::size_t r = 0; r < count; ++r) {
    const auto v = io::read_f64s(in, length);
    const double x = io::read_f64(in);
    const double y = io::read_f64(in);
    db.add(v, {x, y});
  }
  return db;
}

std::vector<double> measure_rssi(const SimulationSetup& setup, const Vec2& position,
                                 std::uint64_t environment_seed, std::uint64_t seed) {
  const auto weights = build_weights(
      setup.geometry, PhaseShifts::constant(setup.geometry.num_elements(), setup.probe_phase));
  const auto h = true_channel(setup, position, environment_seed);
  return compute_rssi(receive(setup.geometry, weights, h, setup.pilot, setup.noise_power, seed));
}

FingerprintDb build_db(const SimulationSetup& setup, const Dataset& dataset,
                       std::span<const std::size_t> trajectories) {
  if (trajectories.empty()) {
    throw DomainError("build_db: empty training split");
  }
  const FingerprintMetadata meta{setup.geometry.n_rf, setup.subcarrier_freqs.size(),
                                 setup.probe_phase, setup.noise_power};
  const auto length = meta.n_rf * meta.n_subcarriers;
  const auto t_len = dataset.trajectory_length();
  std::vector<std::vector<double>> rows(trajectories.size() * t_len);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto d = trajectories[k / t_len];
    const auto s = k % t_len;
    rows[k] = measure_rssi(setup, dataset.trajectories.at(d).trajectory.positions[s],
                           dataset.environment_seed,
                           derive_seed(dataset.seed, "fingerprint-db", d * t_len + s));
  }
  FingerprintDb db(meta, length);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto d = trajectories[k / t_len];
    db.add(rows[k], dataset.trajectories[d].trajectory.positions[k % t_len]);
  }
  return db;
}

}  // namespace dmatrack
