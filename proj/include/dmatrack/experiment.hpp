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

#ifndef DMATRACK_EXPERIMENT_HPP
#define DMATRACK_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dmatrack/ar.hpp"
#include "dmatrack/dataset.hpp"
#include "dmatrack/mmhsa.hpp"

// Orchestration of the two-stage pipeline: data generation, training,
// evaluation against the fingerprinting baseline, and path-count sweeps.
namespace dmatrack {

struct ExperimentConfig {
  std::uint64_t seed = 1;

  // geometry
  std::size_t n_rf = 8;
  std::size_t n_e = 8;
  double carrier_hz = 28e9;
  double permittivity = 6.0;

  Scene scene;  // includes the area

  // channel
  std::size_t n_subcarriers = 4;
  double bandwidth_hz = 5e5;
  std::size_t n_paths = 1;
  double noise_dbm = -60.0;
  double probe_phase = kFullPhase;

  // dataset
  std::size_t trajectories = 400;
  std::size_t trajectory_length = 50;
  double train_fraction = 0.5;
  double step_separation = 0.5;  // [m]; 0 spreads the steps over the whole curve

  // mMHSA
  std::size_t patch_size = 4;
  std::size_t d_hidden = 16;
  std::size_t n_blocks = 3;
  std::size_t n_heads = 2;
  std::size_t mlp_ratio = 2;
  std::size_t head_hidden = 32;
  double mmhsa_learning_rate = 0.002;
  std::size_t mmhsa_epochs = 30;
  std::size_t mmhsa_batch_size = 64;

  // AR
  double ar_learning_rate = 0.002;
  std::size_t ar_epochs = 30;
  std::size_t ar_batch_trajectories = 1;
  ArParams ar_init;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  [[nodiscard]] SimulationSetup simulation_setup() const;
  [[nodiscard]] MmhsaConfig mmhsa_config() const;

  /// Nested JSON text. Missing keys keep their defaults; unknown keys are an error.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json_text() const;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seed-deterministic split of whole trajectories.
DataSplit split_trajectories(std::size_t count, double train_fraction, std::uint64_t seed);

/// gen-data: dataset directory plus split.json and a resolved config.json.
void cmd_gen_data(const ExperimentConfig& config, const std::filesystem::path& out);

struct TrainSummary {
  std::vector<double> mmhsa_loss;
  std::vector<double> ar_loss;
  ArParams ar;
};

/// train: mMHSA on the shuffled train split, then AR on frozen mMHSA
/// predictions along the ordered train trajectories.
TrainSummary cmd_train(const ExperimentConfig& config, const std::filesystem::path& data,
                       const std::filesystem::path& out);

inline const std::vector<std::string> kEvalMethods{"mmhsa", "mmhsa_ar", "fingerprint"};

struct EvalReport {
  /// method -> per-trajectory mean errors, in test-split order.
  std::map<std::string, std::vector<double>> per_trajectory;
  /// method -> mean over trajectories.
  std::map<std::string, double> aggregate;
  /// Error of always answering the area centroid.
  double centroid_error = 0.0;
  std::size_t test_steps = 0;
  std::map<std::string, double> seconds;
};

/// eval: per-step errors of every method on the test split.
EvalReport cmd_eval(const ExperimentConfig& config, const std::filesystem::path& data,
                    const std::filesystem::path& checkpoints, const std::filesystem::path& out);

/// sweep-paths: gen-data / train / eval per path count with derived seeds.
std::vector<std::pair<std::size_t, EvalReport>> cmd_sweep_paths(
    const ExperimentConfig& config, const std::vector<std::size_t>& path_counts,
    const std::filesystem::path& out);

/// The configuration a sweep uses for one path count.
ExperimentConfig sweep_config(const ExperimentConfig& base, std::size_t n_paths);

}  // namespace dmatrack

#endif  // DMATRACK_EXPERIMENT_HPP
