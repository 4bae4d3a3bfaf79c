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

#ifndef DMATRACK_CHANNEL_SIM_HPP
#define DMATRACK_CHANNEL_SIM_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "dmatrack/dma.hpp"

// Synthetic non-LoS multipath channels from mirror-image reflections off
// vertical walls, and Bezier user trajectories over a discretized area.
namespace dmatrack {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

struct PathParams {
  cplx gain;
  double azimuth = 0.0;    // from array broadside, positive toward the microstrip axis [rad]
  double elevation = 0.0;  // above the horizontal plane [rad]
  double delay = 0.0;      // [s]
};

/// Rectangular user area discretized on a regular grid anchored at (x_min, y_min).
struct AreaGrid {
  double x_min = 0.0;
  double x_max = 22.0;
  double y_min = 0.0;
  double y_max = 8.0;
  double spacing = 0.2;
  double height = 2.0;

  void validate() const;
  [[nodiscard]] bool contains(const Vec2& p) const;
  /// Nearest grid point, clamped into the area.
  [[nodiscard]] Vec2 snap(const Vec2& p) const;
  [[nodiscard]] bool on_grid(const Vec2& p) const;
  [[nodiscard]] Vec2 centroid() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
};

/// Infinite vertical wall, given by a point on it and its unit normal (xy).
struct Wall {
  Vec2 point;
  Vec2 normal;
};

/// Receiver pose and reflecting environment. The direct path is always blocked.
struct Scene {
  AreaGrid area;
  Vec3 dma_position{11.0, 14.0, 6.0};
  Vec2 dma_axis{1.0, 0.0};        // direction of the microstrips (columns)
  Vec2 dma_broadside{0.0, -1.0};  // direction the aperture faces
  std::vector<Wall> walls{{{-3.0, 0.0}, {1.0, 0.0}}, {{27.0, 0.0}, {-1.0, 0.0}}};
  std::size_t max_reflection_order = 3;
  double reflection_loss = 0.6;  // amplitude factor per bounce
  double wavelength = kSpeedOfLight / 28e9;

  void validate() const;
  /// Number of distinct wall sequences (no immediate repeats) up to max order.
  [[nodiscard]] std::size_t available_paths() const;
};

/// OFDM subcarrier centre frequencies: carrier + uniform offsets across `bandwidth`.
std::vector<double> subcarrier_frequencies(double carrier, double bandwidth, std::size_t count);

/// Planar-array response; element (row i, column j) sits at u = element_offsets[j]
/// along the microstrip and v = i * wavelength / 2 vertically.
std::vector<cplx> steering_vector(const DmaGeometry& geometry, double azimuth, double elevation);

/// Superposition of paths: h(n, l) = sum_m g_m a_n(az_m, el_m) e^{-j 2 pi f_l tau_m}.
ChannelTensor synth_channel(const DmaGeometry& geometry, const std::vector<PathParams>& paths,
                            const std::vector<double>& subcarrier_freqs);

/// Image-method paths for a user at `position`. The seed fixes one random
/// material phase per wall sequence, so it changes the environment but the
/// map stays continuous in position.
std::vector<PathParams> paths_for_position(const Scene& scene, const Vec2& position,
                                           std::size_t n_paths, std::uint64_t seed);

/// Degree-4 Bernstein evaluation.
Vec2 bezier_point(const std::array<Vec2, 5>& control_points, double s);

struct Trajectory {
  std::array<Vec2, 5> control_points;
  std::vector<Vec2> positions;
};

/// Samples 5 control points uniformly in the area and places n_points
/// arc-length-uniform samples along the curve, snapped to the grid. With
/// step_separation > 0 the samples are instead spaced by that arc length from
/// the start, walking back along the curve when its end is reached.
Trajectory gen_trajectory(const AreaGrid& area, std::size_t n_points, std::uint64_t seed,
                          double step_separation = 0.0);

}  // namespace dmatrack

#endif  // DMATRACK_CHANNEL_SIM_HPP
