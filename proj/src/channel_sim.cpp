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

#include "dmatrack/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dmatrack/errors.hpp"
#include "dmatrack/rng.hpp"

namespace dmatrack {

namespace {

constexpr double kGridTolerance = 1e-9;
constexpr std::size_t kArcSegments = 1024;

double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

Vec2 mirror(const Vec2& p, const Wall& wall) {
  const double d = dot({p.x - wall.point.x, p.y - wall.point.y}, wall.normal);
  return {p.x - 2.0 * d * wall.normal.x, p.y - 2.0 * d * wall.normal.y};
}

// Wall sequences ordered by length, then lexicographically.
std::vector<std::vector<std::size_t>> wall_sequences(std::size_t walls, std::size_t max_order) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::vector<std::size_t>> frontier{{}};
  for (std::size_t order = 1; order <= max_order; ++order) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& seq : frontier) {
      for (std::size_t w = 0; w < walls; ++w) {
        if (!seq.empty() && seq.back() == w) {
          continue;
        }
        auto extended = seq;
        extended.push_back(w);
        next.push_back(std::move(extended));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void AreaGrid::validate() const {
  if (!(spacing > 0.0)) {
    throw DomainError("AreaGrid: spacing must be positive");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw DomainError("AreaGrid: degenerate x or y range");
  }
  if (x_max - x_min < spacing || y_max - y_min < spacing) {
    throw DomainError("AreaGrid: area smaller than one grid cell");
  }
}

bool AreaGrid::contains(const Vec2& p) const {
  return p.x >= x_min - kGridTolerance && p.x <= x_max + kGridTolerance &&
         p.y >= y_min - kGridTolerance && p.y <= y_max + kGridTolerance;
}

Vec2 AreaGrid::snap(const Vec2& p) const {
  const auto snap_axis = [this](double v, double lo, double hi) {
    const double last = std::floor((hi - lo) / spacing + kGridTolerance);
    const double k = std::clamp(std::round((v - lo) / spacing), 0.0, last);
    return lo + k * spacing;
  };
  return {snap_axis(p.x, x_min, x_max), snap_axis(p.y, y_min, y_max)};
}

bool AreaGrid::on_grid(const Vec2& p) const {
  if (!contains(p)) {
    return false;
  }
  const double kx = (p.x - x_min) / spacing;
  const double ky = (p.y - y_min) / spacing;
  return std::abs(kx - std::round(kx)) < 1e-6 && std::abs(ky - std::round(ky)) < 1e-6;
}

void Scene::validate() const {
  area.validate();
  if (walls.empty()) {
    throw DomainError("Scene: at least one reflecting wall is required");
  }
  for (const auto& w : walls) {
    if (std::abs(std::hypot(w.normal.x, w.normal.y) - 1.0) > 1e-9) {
      throw DomainError("Scene: wall normals must be unit vectors");
    }
  }
  if (std::abs(dot(dma_axis, dma_broadside)) > 1e-9 ||
      std::abs(std::hypot(dma_axis.x, dma_axis.y) - 1.0) > 1e-9 ||
      std::abs(std::hypot(dma_broadside.x, dma_broadside.y) - 1.0) > 1e-9) {
    throw DomainError("Scene: DMA axis and broadside must be orthonormal");
  }
  if (!(wavelength > 0.0) || !(reflection_loss > 0.0) || max_reflection_order < 1) {
    throw DomainError("Scene: wavelength, reflection loss and max order must be positive");
  }
}

std::size_t Scene::available_paths() const {
  // W choices for the first bounce, W - 1 for every later one.
  const std::size_t w = walls.size();
  std::size_t total = 0;
  std::size_t level = w;
  for (std::size_t order = 1; order <= max_reflection_order; ++order) {
    total += level;
    level *= w - 1;
    if (level == 0) {
      break;
    }
  }
  return total;
}

std::vector<double> subcarrier_frequencies(double carrier, double bandwidth, std::size_t count) {
  if (count == 0) {
    throw DomainError("subcarrier_frequencies: need at least one subcarrier");
  }
  std::vector<double> f(count);
  const double step = bandwidth / static_cast<double>(count);
  const double mid = (static_cast<double>(count) - 1.0) / 2.0;
  for (std::size_t l = 0; l < count; ++l) {
    f[l] = carrier + (static_cast<double>(l) - mid) * step;
  }
  return f;
}

std::vector<cplx> steering_vector(const DmaGeometry& geometry, double azimuth, double elevation) {
  geometry.validate();
  const double k = 2.0 * std::numbers::pi / geometry.wavelength;
  const double du = std::sin(azimuth) * std::cos(elevation);
  const double dv = std::sin(elevation);
  std::vector<cplx> a(geometry.num_elements());
  for (std::size_t i = 0; i < geometry.n_rf; ++i) {
    const double v = static_cast<double>(i) * geometry.wavelength / 2.0;
    for (std::size_t j = 0; j < geometry.n_e; ++j) {
      const double u = geometry.element_offsets[j];
      a[geometry.index(i, j)] = std::polar(1.0, k * (u * du + v * dv));
    }
  }
  return a;
}

ChannelTensor synth_channel(const DmaGeometry& geometry, const std::vector<PathParams>& paths,
                            const std::vector<double>& subcarrier_freqs) {
  if (paths.empty()) {
    throw DomainError("synth_channel: at least one path is required");
  }
  const auto n = geometry.num_elements();
  const auto l_count = subcarrier_freqs.size();
  ChannelTensor h(n, l_count, subcarrier_freqs);
  std::vector<cplx> delay_phase(l_count);
  for (const auto& path : paths) {
    const auto a = steering_vector(geometry, path.azimuth, path.elevation);
    for (std::size_t l = 0; l < l_count; ++l) {
      delay_phase[l] = path.gain * std::polar(1.0, -2.0 * std::numbers::pi * subcarrier_freqs[l] *
                                                       path.delay);
    }
    for (std::size_t e = 0; e < n; ++e) {
      for (std::size_t l = 0; l < l_count; ++l) {
        h.at(e, l) += a[e] * delay_phase[l];
      }
    }
  }
  return h;
}

std::vector<PathParams> paths_for_position(const Scene& scene, const Vec2& position,
                                           std::size_t n_paths, std::uint64_t seed) {
  const auto available = scene.available_paths();
  if (n_paths == 0 || n_paths > available) {
    throw DomainError("paths_for_position: requested " + std::to_string(n_paths) +
                      " paths, the reflector layout supports 1.." + std::to_string(available));
  }
  if (!scene.area.contains(position)) {
    throw DomainError("paths_for_position: position outside the area");
  }
  const auto sequences = wall_sequences(scene.walls.size(), scene.max_reflection_order);
  std::vector<PathParams> paths;
  paths.reserve(n_paths);
  for (std::size_t m = 0; m < n_paths; ++m) {
    const auto& seq = sequences[m];
    Vec2 image = position;
    for (std::size_t w : seq) {
      image = mirror(image, scene.walls[w]);
    }
    const Vec3 d{image.x - scene.dma_position.x, image.y - scene.dma_position.y,
                 scene.area.height - scene.dma_position.z};
    const double length = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    const double along = d.x * scene.dma_axis.x + d.y * scene.dma_axis.y;
    const double ahead = d.x * scene.dma_broadside.x + d.y * scene.dma_broadside.y;

    Rng rng(derive_seed(seed, "material-phase", m));
    const double material = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double amplitude = scene.wavelength / (4.0 * std::numbers::pi * length) *
                             std::pow(scene.reflection_loss, static_cast<double>(seq.size()));

    PathParams p;
    p.gain = std::polar(amplitude, material);
    p.azimuth = std::atan2(along, ahead);
    p.elevation = std::atan2(d.z, std::hypot(along, ahead));
    p.delay = length / kSpeedOfLight;
    paths.push_back(p);
  }
  return paths;
}

Vec2 bezier_point(const std::array<Vec2, 5>& control_points, double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("bezier_point: parameter outside [0, 1]");
  }
  constexpr std::array<double, 5> binom{1.0, 4.0, 6.0, 4.0, 1.0};
  const double t = 1.0 - s;
  Vec2 out;
  for (int k = 0; k < 5; ++k) {
    const double w = binom[k] * std::pow(s, k) * std::pow(t, 4 - k);
    out.x += w * control_points[k].x;
    out.y += w * control_points[k].y;
  }
  return out;
}

Trajectory gen_trajectory(const AreaGrid& area, std::size_t n_points, std::uint64_t seed,
                          double step_separation) {
  area.validate();
  if (n_points < 2) {
    throw DomainError("gen_trajectory: need at least 2 points");
  }
  if (area.x_max - area.x_min < area.spacing || area.y_max - area.y_min < area.spacing) {
    throw DomainError("gen_trajectory: area smaller than one grid cell");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(area.x_min, area.x_max);
  std::uniform_real_distribution<double> uy(area.y_min, area.y_max);
  Trajectory traj;
  for (auto& cp : traj.control_points) {
    cp.x = ux(rng);
    cp.y = uy(rng);
  }

  // Polyline approximation of the arc length.
  std::vector<double> cumulative(kArcSegments + 1, 0.0);
  Vec2 prev = traj.control_points.front();
  for (std::size_t i = 1; i <= kArcSegments; ++i) {
    const Vec2 cur = bezier_point(traj.control_points, static_cast<double>(i) / kArcSegments);
    cumulative[i] = cumulative[i - 1] + distance(prev, cur);
    prev = cur;
  }
  const double total = cumulative.back();
  const auto param_at = [&](double arc) {
    if (total <= 0.0 || arc <= 0.0) {
      return 0.0;
    }
    if (arc >= total) {
      return 1.0;
    }
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), arc);
    const auto seg = static_cast<std::size_t>(it - cumulative.begin()) - 1;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double frac = len > 0.0 ? (arc - cumulative[seg]) / len : 0.0;
    return std::min(1.0, (static_cast<double>(seg) + frac) / kArcSegments);
  };

  traj.positions.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    double arc;
    if (step_separation > 0.0 && total > 0.0) {
      arc = std::fmod(static_cast<double>(k) * step_separation, 2.0 * total);
      if (arc > total) {
        arc = 2.0 * total - arc;
      }
    } else {
      arc = total * static_cast<double>(k) / static_cast<double>(n_points - 1);
    }
    const double s = (step_separation <= 0.0 && k == n_points - 1) ? 1.0 : param_at(arc);
    traj.positions.push_back(area.snap(bezier_point(traj.control_points, s)));
  }
  return traj;
}

}  // namespace dmatrack
