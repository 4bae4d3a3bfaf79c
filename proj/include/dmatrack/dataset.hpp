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

#ifndef DMATRACK_DATASET_HPP
#define DMATRACK_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dmatrack/channel_sim.hpp"
#include "dmatrack/dma.hpp"

namespace dmatrack {

/// Everything needed to turn a user position into a noisy channel estimate.
struct SimulationSetup {
  DmaGeometry geometry;
  Scene scene;
  std::vector<double> subcarrier_freqs;
  std::size_t n_paths = 1;
  double noise_power = 1e-9;
  double probe_phase = kFullPhase;
  cplx pilot{1.0, 0.0};
  double step_separation = 0.0;

  void validate() const;
};

struct SampleRef {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

struct TrajectorySamples {
  Trajectory trajectory;
  std::vector<ChannelEstimate> estimates;
};

/// Ordered trajectories plus a shuffled flat view over all (trajectory, step) pairs.
struct Dataset {
  std::uint64_t seed = 0;
  std::uint64_t environment_seed = 0;
  std::vector<TrajectorySamples> trajectories;
  std::vector<SampleRef> shuffled;

  [[nodiscard]] std::size_t trajectory_length() const {
    return trajectories.empty() ? 0 : trajectories.front().trajectory.positions.size();
  }
  [[nodiscard]] std::size_t total_steps() const {
    return trajectories.size() * trajectory_length();
  }
  [[nodiscard]] const ChannelEstimate& estimate(const SampleRef& r) const {
    return trajectories[r.trajectory].estimates[r.step];
  }
  [[nodiscard]] const Vec2& position(const SampleRef& r) const {
    return trajectories[r.trajectory].trajectory.positions[r.step];
  }
};

/// Noise-free channel of a user at `position`.
ChannelTensor true_channel(const SimulationSetup& setup, const Vec2& position,
                           std::uint64_t environment_seed);

/// Builds `count` trajectories of `length` steps, estimating the channel at every
/// step. Trajectories are generated in parallel with per-trajectory seeds.
Dataset make_dataset(const SimulationSetup& setup, std::size_t count, std::size_t length,
                     std::uint64_t seed);

/// Directory layout: manifest.json, positions.bin (f64 x, y pairs,
/// trajectory-major) and traj_NNNNN.dmac (one channel record per step).
void save_dataset(const std::filesystem::path& dir, const SimulationSetup& setup,
                  const Dataset& dataset);

struct LoadedDataset {
  SimulationSetup setup;
  Dataset dataset;
};
LoadedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace dmatrack

#endif  // DMATRACK_DATASET_HPP
