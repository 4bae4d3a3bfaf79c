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

#include "dmatrack/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/rng.hpp"

namespace dmatrack {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kDatasetFormat = "dmatrack-dataset";
constexpr int kDatasetVersion = 1;

std::string trajectory_file(std::size_t d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "traj_%05zu.dmac", d);
  return buf;
}

json vec2_json(const Vec2& v) { return json::array({v.x, v.y}); }
Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json setup_json(const SimulationSetup& s) {
  json j;
  j["geometry"] = {{"n_rf", s.geometry.n_rf},
                   {"n_e", s.geometry.n_e},
                   {"wavelength", s.geometry.wavelength},
                   {"permittivity", s.geometry.permittivity},
                   {"element_offsets", s.geometry.element_offsets},
                   {"p_max", s.geometry.p_max}};
  const auto& a = s.scene.area;
  j["area"] = {{"x_min", a.x_min}, {"x_max", a.x_max},     {"y_min", a.y_min},
               {"y_max", a.y_max}, {"spacing", a.spacing}, {"height", a.height}};
  json walls = json::array();
  for (const auto& w : s.scene.walls) {
    walls.push_back({{"point", vec2_json(w.point)}, {"normal", vec2_json(w.normal)}});
  }
  j["scene"] = {{"dma_position", {s.scene.dma_position.x, s.scene.dma_position.y,
                                  s.scene.dma_position.z}},
                {"dma_axis", vec2_json(s.scene.dma_axis)},
                {"dma_broadside", vec2_json(s.scene.dma_broadside)},
                {"walls", walls},
                {"max_reflection_order", s.scene.max_reflection_order},
                {"reflection_loss", s.scene.reflection_loss},
                {"wavelength", s.scene.wavelength}};
  j["subcarrier_freqs"] = s.subcarrier_freqs;
  j["n_paths"] = s.n_paths;
  j["noise_power"] = s.noise_power;
  j["probe_phase"] = s.probe_phase;
  j["pilot"] = {s.pilot.real(), s.pilot.imag()};
  j["step_separation"] = s.step_separation;
  return j;
}

SimulationSetup setup_from(const json& j) {
  SimulationSetup s;
  const auto& g = j.at("geometry");
  s.geometry.n_rf = g.at("n_rf");
  s.geometry.n_e = g.at("n_e");
  s.geometry.wavelength = g.at("wavelength");
  s.geometry.permittivity = g.at("permittivity");
  s.geometry.element_offsets = g.at("element_offsets").get<std::vector<double>>();
  s.geometry.p_max = g.at("p_max");
  const auto& a = j.at("area");
  s.scene.area = {a.at("x_min"), a.at("x_max"),   a.at("y_min"),
                  a.at("y_max"), a.at("spacing"), a.at("height")};
  const auto& sc = j.at("scene");
  const auto& pos = sc.at("dma_position");
  s.scene.dma_position = {pos.at(0), pos.at(1), pos.at(2)};
  s.scene.dma_axis = vec2_from(sc.at("dma_axis"));
  s.scene.dma_broadside = vec2_from(sc.at("dma_broadside"));
  s.scene.walls.clear();
  for (const auto& w : sc.at("walls")) {
    s.scene.walls.push_back({vec2_from(w.at("point")), vec2_from(w.at("normal"))});
  }
  s.scene.max_reflection_order = sc.at("max_reflection_order");
  s.scene.reflection_loss = sc.at("reflection_loss");
  s.scene.wavelength = sc.at("wavelength");
  s.subcarrier_freqs = j.at("subcarrier_freqs").get<std::vector<double>>();
  s.n_paths = j.at("n_paths");
  s.noise_power = j.at("noise_power");
  s.probe_phase = j.at("probe_phase");
  s.pilot = {j.at("pilot").at(0).get<double>(), j.at("pilot").at(1).get<double>()};
  s.step_separation = j.at("step_separation");
  return s;
}

}  // namespace

void SimulationSetup::validate() const {
  geometry.validate();
  scene.validate();
  if (subcarrier_freqs.empty()) {
    throw DomainError("SimulationSetup: no subcarriers");
  }
  if (n_paths == 0 || n_paths > scene.available_paths()) {
    throw DomainError("SimulationSetup: n_paths must be in 1.." +
                      std::to_string(scene.available_paths()));
  }
  if (noise_power < 0.0) {
    throw DomainError("SimulationSetup: negative noise power");
  }
}

ChannelTensor true_channel(const SimulationSetup& setup, const Vec2& position,
                           std::uint64_t environment_seed) {
  return synth_channel(setup.geometry,
                       paths_for_position(setup.scene, position, setup.n_paths, environment_seed),
                       setup.subcarrier_freqs);
}

Dataset make_dataset(const SimulationSetup& setup, std::size_t count, std::size_t length,
                     std::uint64_t seed) {
  setup.validate();
  if (count == 0 || length == 0) {
    throw DomainError("make_dataset: trajectory count and length must be positive");
  }
  Dataset ds;
  ds.seed = seed;
  ds.environment_seed = derive_seed(seed, "environment");
  ds.trajectories.resize(count);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t di = 0; di < static_cast<std::int64_t>(count); ++di) {
    const auto d = static_cast<std::size_t>(di);
    auto& entry = ds.trajectories[d];
    if (length == 1) {
      // A single step has no curve; use the snapped first control point.
      auto t = gen_trajectory(setup.scene.area, 2, derive_seed(seed, "trajectory", d),
                              setup.step_separation);
      t.positions.resize(1);
      entry.trajectory = std::move(t);
    } else {
      entry.trajectory = gen_trajectory(setup.scene.area, length,
                                        derive_seed(seed, "trajectory", d), setup.step_separation);
    }
    entry.estimates.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
      const auto h = true_channel(setup, entry.trajectory.positions[t], ds.environment_seed);
      entry.estimates.push_back(estimate_channel(setup.geometry, h, setup.pilot,
                                                 setup.noise_power, setup.probe_phase,
                                                 derive_seed(seed, "pilot-noise", d * length + t)));
    }
  }

  std::vector<std::size_t> order(count * length);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "shuffle"));
  std::shuffle(order.begin(), order.end(), rng);
  ds.shuffled.reserve(order.size());
  for (auto k : order) {
    ds.shuffled.push_back({k / length, k % length});
  }
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const SimulationSetup& setup,
                  const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  const auto length = dataset.trajectory_length();
  json manifest;
  manifest["format"] = kDatasetFormat;
  manifest["version"] = kDatasetVersion;
  manifest["seed"] = dataset.seed;
  manifest["environment_seed"] = dataset.environment_seed;
  manifest["trajectories"] = dataset.trajectories.size();
  manifest["trajectory_length"] = length;
  manifest["setup"] = setup_json(setup);
  json controls = json::array();
  for (const auto& t : dataset.trajectories) {
    json cps = json::array();
    for (const auto& cp : t.trajectory.control_points) {
      cps.push_back(vec2_json(cp));
    }
    controls.push_back(std::move(cps));
  }
  manifest["control_points"] = std::move(controls);
  json shuffled = json::array();
  for (const auto& r : dataset.shuffled) {
    shuffled.push_back(r.trajectory * length + r.step);
  }
  manifest["shuffled"] = std::move(shuffled);
  io::write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");

  std::ofstream positions(dir / "positions.bin", std::ios::binary);
  for (std::size_t d = 0; d < dataset.trajectories.size(); ++d) {
    const auto& t = dataset.trajectories[d];
    std::ofstream records(dir / trajectory_file(d), std::ios::binary);
    for (std::size_t s = 0; s < t.estimates.size(); ++s) {
      write_channel_record(records, t.estimates[s]);
      io::write_f64(positions, t.trajectory.positions[s].x);
      io::write_f64(positions, t.trajectory.positions[s].y);
    }
    if (!records) {
      throw std::runtime_error("failed writing " + (dir / trajectory_file(d)).string());
    }
  }
  if (!positions) {
    throw std::runtime_error("failed writing positions.bin");
  }
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(io::read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("dataset manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != kDatasetFormat ||
      manifest.value("version", 0) != kDatasetVersion) {
    throw FormatError("dataset " + dir.string() + ": unsupported format");
  }
  LoadedDataset out;
  try {
    out.setup = setup_from(manifest.at("setup"));
    auto& ds = out.dataset;
    ds.seed = manifest.at("seed");
    ds.environment_seed = manifest.at("environment_seed");
    const std::size_t count = manifest.at("trajectories");
    const std::size_t length = manifest.at("trajectory_length");
    const auto& controls = manifest.at("control_points");
    ds.trajectories.resize(count);
    std::ifstream positions(dir / "positions.bin", std::ios::binary);
    if (!positions) {
      throw FormatError("dataset: missing positions.bin");
    }
    const auto l_count = out.setup.subcarrier_freqs.size();
    const auto n = out.setup.geometry.num_elements();
    for (std::size_t d = 0; d < count; ++d) {
      auto& t = ds.trajectories[d];
      for (std::size_t k = 0; k < 5; ++k) {
        t.trajectory.control_points[k] = vec2_from(controls.at(d).at(k));
      }
      std::ifstream records(dir / trajectory_file(d), std::ios::binary);
      if (!records) {
        throw FormatError("dataset: missing " + trajectory_file(d));
      }
      for (std::size_t s = 0; s < length; ++s) {
        auto e = read_estimate_record(records);
        if (e.n_elements != n || e.n_subcarriers != l_count) {
          throw FormatError("dataset: record dimensions disagree with the manifest");
        }
        e.noise_power = out.setup.noise_power;
        t.estimates.push_back(std::move(e));
        const double x = io::read_f64(positions);
        const double y = io::read_f64(positions);
        t.trajectory.positions.push_back({x, y});
      }
    }
    const auto& shuffled = manifest.at("shuffled");
    if (shuffled.size() != count * length) {
      throw FormatError("dataset: shuffled view has wrong size");
    }
    for (const auto& k : shuffled) {
      const std::size_t idx = k.get<std::size_t>();
      if (idx >= count * length) {
        throw FormatError("dataset: shuffled index out of range");
      }
      ds.shuffled.push_back({idx / length, idx % length});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset manifest: " + std::string(e.what()));
  }
  return out;
}

}  // namespace dmatrack
