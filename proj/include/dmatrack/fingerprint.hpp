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

#ifndef DMATRACK_FINGERPRINT_HPP
#define DMATRACK_FINGERPRINT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dmatrack/channel_sim.hpp"
#include "dmatrack/dataset.hpp"
#include "dmatrack/dma.hpp"

// RSSI fingerprinting baseline: nearest neighbour over received power vectors.
namespace dmatrack {

/// |y_i^l|^2 per RF chain and subcarrier, RFC-major, linear units.
std::vector<double> compute_rssi(const ReceivedSignal& signal);

struct FingerprintMetadata {
  std::size_t n_rf = 0;
  std::size_t n_subcarriers = 0;
  double probe_phase = kFullPhase;
  double noise_power = 0.0;
};

class FingerprintDb {
 public:
  FingerprintDb() = default;
  FingerprintDb(FingerprintMetadata metadata, std::size_t vector_length);

  void add(std::span<const double> rssi, const Vec2& position);

  [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
  [[nodiscard]] std::size_t vector_length() const noexcept { return vector_length_; }
  [[nodiscard]] const FingerprintMetadata& metadata() const noexcept { return metadata_; }
  [[nodiscard]] std::span<const double> rssi(std::size_t record) const;
  [[nodiscard]] const Vec2& position(std::size_t record) const { return positions_.at(record); }

  /// Index of the record closest to `rssi` (lowest index on ties).
  [[nodiscard]] std::size_t nearest(std::span<const double> rssi) const;
  /// Position of the nearest record.
  [[nodiscard]] Vec2 query(std::span<const double> rssi) const;

  /// `<path>`: text header lines followed by a binary body of f64 records
  /// (rssi entries, then x, y).
  void save(const std::filesystem::path& path) const;
  static FingerprintDb load(const std::filesystem::path& path);

 private:
  FingerprintMetadata metadata_;
  std::size_t vector_length_ = 0;
  std::vector<double> records_;
  std::vector<Vec2> positions_;
};

/// Received power under the fixed probe configuration (every element at
/// `probe_phase`), with fresh noise from `seed`.
std::vector<double> measure_rssi(const SimulationSetup& setup, const Vec2& position,
                                 std::uint64_t environment_seed, std::uint64_t seed);

/// One record per (trajectory, step) of the listed trajectories.
FingerprintDb build_db(const SimulationSetup& setup, const Dataset& dataset,
                       std::span<const std::size_t> trajectories);

}  // namespace dmatrack

#endif  // DMATRACK_FINGERPRINT_HPP
