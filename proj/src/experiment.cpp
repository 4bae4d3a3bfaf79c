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

#include "dmatrack/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/fingerprint.hpp"
#include "dmatrack/rng.hpp"
#include "json.hpp"

namespace dmatrack {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Strict reader for one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) {
      throw ConfigError("config: '" + name_ + "' must be an object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) {
      return;
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void get_vec2(const char* key, Vec2& out) {
    std::vector<double> v{out.x, out.y};
    get(key, v);
    if (v.size() != 2) {
      throw ConfigError("config: '" + name_ + "." + key + "' must have 2 entries");
    }
    out = {v[0], v[1]};
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }

  /// Nested object or array; an absent key reads as an empty object.
  const json& child(const char* key) {
    static const json kEmpty = json::object();
    used_.insert(key);
    return j_.contains(key) ? j_.at(key) : kEmpty;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (used_.count(key) == 0) {
        throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

json vec2_json(const Vec2& v) { return json::array({v.x, v.y}); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_split(const fs::path& path, const DataSplit& split) {
  json j{{"train", split.train}, {"test", split.test}};
  io::write_text_file(path, j.dump(1) + "\n");
}

DataSplit read_split(const fs::path& path, std::size_t count) {
  DataSplit split;
  try {
    const auto j = json::parse(io::read_text_file(path));
    split.train = j.at("train").get<std::vector<std::size_t>>();
    split.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw FormatError("split.json: " + std::string(e.what()));
  }
  for (const auto idx : split.train) {
    if (idx >= count) throw FormatError("split.json: trajectory index out of range");
  }
  for (const auto idx : split.test) {
    if (idx >= count) throw FormatError("split.json: trajectory index out of range");
  }
  if (split.train.empty() || split.test.empty()) {
    throw FormatError("split.json: empty train or test split");
  }
  return split;
}

void check_dataset_matches(const ExperimentConfig& config, const LoadedDataset& data) {
  const auto& g = data.setup.geometry;
  if (g.n_rf != config.n_rf || g.n_e != config.n_e ||
      data.setup.subcarrier_freqs.size() != config.n_subcarriers) {
    throw ConfigError("dataset is incompatible with the config: dataset has N_RF=" +
                      std::to_string(g.n_rf) + ", N_E=" + std::to_string(g.n_e) +
                      ", L=" + std::to_string(data.setup.subcarrier_freqs.size()));
  }
}

std::vector<const ChannelEstimate*> estimates_of(const Dataset& ds,
                                                 std::span<const std::size_t> trajectories) {
  std::vector<const ChannelEstimate*> out;
  for (const auto d : trajectories) {
    for (const auto& e : ds.trajectories[d].estimates) out.push_back(&e);
  }
  return out;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
  std::string text = "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    text += std::to_string(e + 1) + "," + fmt(losses[e]) + "\n";
  }
  io::write_text_file(path, text);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear-interpolated empirical quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(n_rf >= 1 && n_e >= 1, "geometry.n_rf and geometry.n_e must be positive");
  need(carrier_hz > 0.0 && std::isfinite(carrier_hz), "geometry.carrier_hz must be positive");
  need(permittivity > 0.0, "geometry.permittivity must be positive");
  need(n_subcarriers >= 1, "channel.n_subcarriers must be positive");
  need(bandwidth_hz >= 0.0, "channel.bandwidth_hz must be non-negative");
  need(std::isfinite(noise_dbm), "channel.noise_dbm must be finite");
  need(probe_phase >= kOffPhase && probe_phase <= kFullPhase,
       "channel.probe_phase must lie in [-pi/2, pi/2]");
  need(trajectories >= 2, "dataset.trajectories must be at least 2 to split train and test");
  need(trajectory_length >= 1, "dataset.trajectory_length must be positive");
  need(train_fraction > 0.0 && train_fraction < 1.0, "dataset.train_fraction must be in (0, 1)");
  need(step_separation >= 0.0, "dataset.step_separation must be non-negative");
  need(mmhsa_learning_rate > 0.0 && std::isfinite(mmhsa_learning_rate),
       "mmhsa.learning_rate must be positive");
  need(mmhsa_epochs >= 1 && mmhsa_batch_size >= 1, "mmhsa.epochs and mmhsa.batch_size must be positive");
  need(ar_learning_rate > 0.0 && std::isfinite(ar_learning_rate), "ar.learning_rate must be positive");
  need(ar_epochs >= 1 && ar_batch_trajectories >= 1,
       "ar.epochs and ar.batch_trajectories must be positive");
  try {
    scene.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: scene: ") + e.what());
  }
  need(n_paths >= 1 && n_paths <= scene.available_paths(),
       "channel.n_paths must be in 1.." + std::to_string(scene.available_paths()));
  mmhsa_config().validate();
}

SimulationSetup ExperimentConfig::simulation_setup() const {
  SimulationSetup s;
  const double wavelength = kSpeedOfLight / carrier_hz;
  s.geometry = DmaGeometry::uniform(n_rf, n_e, wavelength, permittivity);
  s.scene = scene;
  s.scene.wavelength = wavelength;
  s.subcarrier_freqs = subcarrier_frequencies(carrier_hz, bandwidth_hz, n_subcarriers);
  s.n_paths = n_paths;
  s.noise_power = dbm_to_watts(noise_dbm);
  s.probe_phase = probe_phase;
  s.step_separation = step_separation;
  return s;
}

MmhsaConfig ExperimentConfig::mmhsa_config() const {
  auto c = MmhsaConfig::for_input(n_rf * n_e, n_subcarriers);
  c.patch_size = patch_size;
  c.d_hidden = d_hidden;
  c.n_blocks = n_blocks;
  c.n_heads = n_heads;
  c.mlp_ratio = mlp_ratio;
  c.head_hidden = head_hidden;
  return c;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "config");
  top.get("seed", c.seed);
  auto sub = [&](const char* key) -> const json& { return top.child(key); };

  {
    Section s(sub("geometry"), "geometry");
    s.get("n_rf", c.n_rf);
    s.get("n_e", c.n_e);
    s.get("carrier_hz", c.carrier_hz);
    s.get("permittivity", c.permittivity);
    s.finish();
  }
  {
    Section s(sub("area"), "area");
    auto& a = c.scene.area;
    s.get("x_min", a.x_min);
    s.get("x_max", a.x_max);
    s.get("y_min", a.y_min);
    s.get("y_max", a.y_max);
    s.get("spacing", a.spacing);
    s.get("height", a.height);
    s.finish();
  }
  {
    Section s(sub("scene"), "scene");
    std::vector<double> pos{c.scene.dma_position.x, c.scene.dma_position.y, c.scene.dma_position.z};
    s.get("dma_position", pos);
    if (pos.size() != 3) throw ConfigError("config: 'scene.dma_position' must have 3 entries");
    c.scene.dma_position = {pos[0], pos[1], pos[2]};
    s.get_vec2("dma_axis", c.scene.dma_axis);
    s.get_vec2("dma_broadside", c.scene.dma_broadside);
    if (s.has("walls")) {
      const auto& walls = s.child("walls");
      if (!walls.is_array()) throw ConfigError("config: 'scene.walls' must be an array");
      c.scene.walls.clear();
      for (const auto& w : walls) {
        Section ws(w, "scene.walls[]");
        Wall wall;
        ws.get_vec2("point", wall.point);
        ws.get_vec2("normal", wall.normal);
        ws.finish();
        c.scene.walls.push_back(wall);
      }
    }
    s.get("max_reflection_order", c.scene.max_reflection_order);
    s.get("reflection_loss", c.scene.reflection_loss);
    s.finish();
  }
  {
    Section s(sub("channel"), "channel");
    s.get("n_subcarriers", c.n_subcarriers);
    s.get("bandwidth_hz", c.bandwidth_hz);
    s.get("n_paths", c.n_paths);
    s.get("noise_dbm", c.noise_dbm);
    s.get("probe_phase", c.probe_phase);
    s.finish();
  }
  {
    Section s(sub("dataset"), "dataset");
    s.get("trajectories", c.trajectories);
    s.get("trajectory_length", c.trajectory_length);
    s.get("train_fraction", c.train_fraction);
    s.get("step_separation", c.step_separation);
    s.finish();
  }
  {
    Section s(sub("mmhsa"), "mmhsa");
    s.get("patch_size", c.patch_size);
    s.get("d_hidden", c.d_hidden);
    s.get("n_blocks", c.n_blocks);
    s.get("n_heads", c.n_heads);
    s.get("mlp_ratio", c.mlp_ratio);
    s.get("head_hidden", c.head_hidden);
    s.get("learning_rate", c.mmhsa_learning_rate);
    s.get("epochs", c.mmhsa_epochs);
    s.get("batch_size", c.mmhsa_batch_size);
    s.finish();
  }
  {
    Section s(sub("ar"), "ar");
    s.get("learning_rate", c.ar_learning_rate);
    s.get("epochs", c.ar_epochs);
    s.get("batch_trajectories", c.ar_batch_trajectories);
    s.get("gamma_init", c.ar_init.gamma);
    s.get_vec2("z_init", c.ar_init.z);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("config: cannot read " + path.string());
  }
  return from_json_text(text);
}

std::string ExperimentConfig::to_json_text() const {
  json walls = json::array();
  for (const auto& w : scene.walls) {
    walls.push_back({{"point", vec2_json(w.point)}, {"normal", vec2_json(w.normal)}});
  }
  const auto& a = scene.area;
  json j{
      {"seed", seed},
      {"geometry",
       {{"n_rf", n_rf}, {"n_e", n_e}, {"carrier_hz", carrier_hz}, {"permittivity", permittivity}}},
      {"area",
       {{"x_min", a.x_min},
        {"x_max", a.x_max},
        {"y_min", a.y_min},
        {"y_max", a.y_max},
        {"spacing", a.spacing},
        {"height", a.height}}},
      {"scene",
       {{"dma_position", {scene.dma_position.x, scene.dma_position.y, scene.dma_position.z}},
        {"dma_axis", vec2_json(scene.dma_axis)},
        {"dma_broadside", vec2_json(scene.dma_broadside)},
        {"walls", walls},
        {"max_reflection_order", scene.max_reflection_order},
        {"reflection_loss", scene.reflection_loss}}},
      {"channel",
       {{"n_subcarriers", n_subcarriers},
        {"bandwidth_hz", bandwidth_hz},
        {"n_paths", n_paths},
        {"noise_dbm", noise_dbm},
        {"probe_phase", probe_phase}}},
      {"dataset",
       {{"trajectories", trajectories},
        {"trajectory_length", trajectory_length},
        {"train_fraction", train_fraction},
        {"step_separation", step_separation}}},
      {"mmhsa",
       {{"patch_size", patch_size},
        {"d_hidden", d_hidden},
        {"n_blocks", n_blocks},
        {"n_heads", n_heads},
        {"mlp_ratio", mlp_ratio},
        {"head_hidden", head_hidden},
        {"learning_rate", mmhsa_learning_rate},
        {"epochs", mmhsa_epochs},
        {"batch_size", mmhsa_batch_size}}},
      {"ar",
       {{"learning_rate", ar_learning_rate},
        {"epochs", ar_epochs},
        {"batch_trajectories", ar_batch_trajectories},
        {"gamma_init", ar_init.gamma},
        {"z_init", vec2_json(ar_init.z)}}}};
  return j.dump(2) + "\n";
}

DataSplit split_trajectories(std::size_t count, double train_fraction, std::uint64_t seed) {
  if (count < 2) {
    throw ConfigError("cannot split " + std::to_string(count) +
                      " trajectory into non-empty train and test sets");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(count)));
  n_train = std::clamp<std::size_t>(n_train, 1, count - 1);
  DataSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void cmd_gen_data(const ExperimentConfig& config, const fs::path& out) {
  config.validate();
  const auto split =
      split_trajectories(config.trajectories, config.train_fraction, derive_seed(config.seed, "split"));
  const auto setup = config.simulation_setup();
  const auto dataset = make_dataset(setup, config.trajectories, config.trajectory_length,
                                    derive_seed(config.seed, "dataset"));
  save_dataset(out, setup, dataset);
  write_split(out / "split.json", split);
  io::write_text_file(out / "config.json", config.to_json_text());
}

TrainSummary cmd_train(const ExperimentConfig& config, const fs::path& data, const fs::path& out) {
  config.validate();
  const auto loaded = load_dataset(data);
  check_dataset_matches(config, loaded);
  const auto& ds = loaded.dataset;
  const auto split = read_split(data / "split.json", ds.trajectories.size());

  std::vector<bool> is_train(ds.trajectories.size(), false);
  for (const auto d : split.train) is_train[d] = true;
  std::vector<LabeledEstimate> samples;
  for (const auto& ref : ds.shuffled) {
    if (is_train[ref.trajectory]) samples.push_back({&ds.estimate(ref), ds.position(ref)});
  }

  auto mcfg = config.mmhsa_config();
  mcfg.input_scale = input_scale_for(samples);
  MmhsaTrainOptions mopt;
  mopt.learning_rate = config.mmhsa_learning_rate;
  mopt.epochs = config.mmhsa_epochs;
  mopt.batch_size = config.mmhsa_batch_size;
  mopt.seed = derive_seed(config.seed, "mmhsa-train");
  auto mres = train_mmhsa(samples, mcfg, mopt);

  const auto train_estimates = estimates_of(ds, split.train);
  const auto preds = forward_batch(train_estimates, mres.params, mcfg);
  std::vector<ArTrajectory> ar_set;
  const auto len = ds.trajectory_length();
  for (std::size_t k = 0; k < split.train.size(); ++k) {
    ArTrajectory t;
    t.truths = ds.trajectories[split.train[k]].trajectory.positions;
    t.predictions.assign(preds.begin() + static_cast<std::ptrdiff_t>(k * len),
                         preds.begin() + static_cast<std::ptrdiff_t>((k + 1) * len));
    ar_set.push_back(std::move(t));
  }
  ArTrainOptions aopt;
  aopt.learning_rate = config.ar_learning_rate;
  aopt.epochs = config.ar_epochs;
  aopt.batch_trajectories = config.ar_batch_trajectories;
  aopt.seed = derive_seed(config.seed, "ar-train");
  auto ares = ar_train(ar_set, aopt, config.ar_init);

  fs::create_directories(out);
  save_mmhsa(out, mcfg, mres.params);
  save_ar(out, ares.params);
  write_loss_csv(out / "loss_mmhsa.csv", mres.loss_history);
  write_loss_csv(out / "loss_ar.csv", ares.loss_history);
  io::write_text_file(out / "config.json", config.to_json_text());
  return {std::move(mres.loss_history), std::move(ares.loss_history), ares.params};
}

EvalReport cmd_eval(const ExperimentConfig& config, const fs::path& data, const fs::path& checkpoints,
                    const fs::path& out) {
  config.validate();
  const auto loaded = load_dataset(data);
  check_dataset_matches(config, loaded);
  const auto& ds = loaded.dataset;
  const auto& setup = loaded.setup;
  const auto split = read_split(data / "split.json", ds.trajectories.size());
  const auto net = load_mmhsa(checkpoints);
  const auto ar = load_ar(checkpoints);

  auto expected = config.mmhsa_config();
  expected.input_scale = net.config.input_scale;
  const auto& got = net.config;
  if (got.n_elements != expected.n_elements || got.n_subcarriers != expected.n_subcarriers ||
      got.patch_size != expected.patch_size || got.d_hidden != expected.d_hidden ||
      got.n_blocks != expected.n_blocks || got.n_heads != expected.n_heads ||
      got.mlp_ratio != expected.mlp_ratio || got.head_hidden != expected.head_hidden) {
    throw ConfigError("checkpoint is incompatible with the config: checkpoint was trained for N=" +
                      std::to_string(got.n_elements) + ", L=" + std::to_string(got.n_subcarriers) +
                      ", p=" + std::to_string(got.patch_size) + ", d=" +
                      std::to_string(got.d_hidden));
  }

  EvalReport report;
  const auto len = ds.trajectory_length();
  const auto n_test = split.test.size();
  report.test_steps = n_test * len;

  auto t0 = std::chrono::steady_clock::now();
  const auto test_estimates = estimates_of(ds, split.test);
  const auto raw = forward_batch(test_estimates, net.params, net.config);
  report.seconds["mmhsa"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<Vec2> refined;
  refined.reserve(raw.size());
  for (std::size_t k = 0; k < n_test; ++k) {
    const auto smoothed = ar_smooth(
        std::span<const Vec2>(raw).subspan(k * len, len), ar);
    refined.insert(refined.end(), smoothed.begin(), smoothed.end());
  }
  report.seconds["mmhsa_ar"] = seconds_since(t0) + report.seconds["mmhsa"];

  t0 = std::chrono::steady_clock::now();
  const auto db = build_db(setup, ds, split.train);
  const double build_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  std::vector<Vec2> fp(raw.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ki = 0; ki < static_cast<std::int64_t>(n_test * len); ++ki) {
    const auto k = static_cast<std::size_t>(ki);
    const auto d = split.test[k / len];
    const auto t = k % len;
    const auto& pos = ds.trajectories[d].trajectory.positions[t];
    const auto rssi = measure_rssi(setup, pos, ds.environment_seed,
                                   derive_seed(ds.seed, "fingerprint-query", d * len + t));
    fp[k] = db.query(rssi);
  }
  report.seconds["fingerprint"] = seconds_since(t0);
  report.seconds["fingerprint_db_build"] = build_seconds;

  const std::map<std::string, const std::vector<Vec2>*> predictions{
      {"mmhsa", &raw}, {"mmhsa_ar", &refined}, {"fingerprint", &fp}};
  const auto centroid = setup.scene.area.centroid();
  std::map<std::string, std::vector<double>> all_errors;
  std::string errors_csv = "trajectory,step,method,error\n";
  std::vector<double> centroid_errors;
  for (std::size_t k = 0; k < n_test; ++k) {
    const auto d = split.test[k];
    for (std::size_t t = 0; t < len; ++t) {
      const auto& truth = ds.trajectories[d].trajectory.positions[t];
      centroid_errors.push_back(distance(centroid, truth));
      for (const auto& method : kEvalMethods) {
        const double err = distance((*predictions.at(method))[k * len + t], truth);
        all_errors[method].push_back(err);
        errors_csv += std::to_string(d) + "," + std::to_string(t) + "," + method + "," + fmt(err) + "\n";
      }
    }
  }
  report.centroid_error = mean_of(centroid_errors);

  std::string traj_csv = "trajectory,method,mean_error\n";
  for (const auto& method : kEvalMethods) {
    auto& per = report.per_trajectory[method];
    const auto& errs = all_errors[method];
    for (std::size_t k = 0; k < n_test; ++k) {
      const std::vector<double> slice(errs.begin() + static_cast<std::ptrdiff_t>(k * len),
                                      errs.begin() + static_cast<std::ptrdiff_t>((k + 1) * len));
      per.push_back(mean_of(slice));
      traj_csv += std::to_string(split.test[k]) + "," + method + "," + fmt(per.back()) + "\n";
    }
    report.aggregate[method] = mean_of(per);
  }

  std::string summary_csv = "method,mean_error,median_error,p90_error,steps\n";
  std::string cdf_csv = "method,quantile,error\n";
  auto summarize = [&](const std::string& name, double mean, std::vector<double> errs) {
    std::sort(errs.begin(), errs.end());
    summary_csv += name + "," + fmt(mean) + "," + fmt(quantile(errs, 0.5)) + "," +
                   fmt(quantile(errs, 0.9)) + "," + std::to_string(errs.size()) + "\n";
    for (int q = 0; q <= 20; ++q) {
      const double qq = q / 20.0;
      cdf_csv += name + "," + fmt(qq) + "," + fmt(quantile(errs, qq)) + "\n";
    }
  };
  for (const auto& method : kEvalMethods) {
    summarize(method, report.aggregate[method], all_errors[method]);
  }
  summarize("centroid", report.centroid_error, centroid_errors);

  fs::create_directories(out);
  io::write_text_file(out / "errors.csv", errors_csv);
  io::write_text_file(out / "trajectory_errors.csv", traj_csv);
  io::write_text_file(out / "summary.csv", summary_csv);
  io::write_text_file(out / "cdf.csv", cdf_csv);
  db.save(out / "fingerprint.db");
  return report;
}

ExperimentConfig sweep_config(const ExperimentConfig& base, std::size_t n_paths) {
  auto c = base;
  c.n_paths = n_paths;
  c.seed = derive_seed(base.seed, "sweep-paths", n_paths);
  return c;
}

std::vector<std::pair<std::size_t, EvalReport>> cmd_sweep_paths(
    const ExperimentConfig& config, const std::vector<std::size_t>& path_counts, const fs::path& out) {
  if (path_counts.empty()) {
    throw ConfigError("sweep-paths: no path counts given");
  }
  std::vector<std::pair<std::size_t, EvalReport>> results;
  std::string csv = "n_paths,method,mean_error\n";
  std::string failures;
  for (const auto n : path_counts) {
    const auto dir = out / ("paths_" + std::to_string(n));
    try {
      const auto c = sweep_config(config, n);
      c.validate();
      cmd_gen_data(c, dir / "data");
      cmd_train(c, dir / "data", dir / "model");
      auto report = cmd_eval(c, dir / "data", dir / "model", dir / "eval");
      for (const auto& method : kEvalMethods) {
        csv += std::to_string(n) + "," + method + "," + fmt(report.aggregate.at(method)) + "\n";
      }
      results.emplace_back(n, std::move(report));
    } catch (const std::exception& e) {
      for (const auto& method : kEvalMethods) {
        csv += std::to_string(n) + "," + method + ",nan\n";
      }
      failures += std::to_string(n) + ": " + e.what() + "\n";
    }
  }
  fs::create_directories(out);
  io::write_text_file(out / "sweep.csv", csv);
  if (!failures.empty()) {
    io::write_text_file(out / "sweep_failures.txt", failures);
  }
  return results;
}

}  // namespace dmatrack
