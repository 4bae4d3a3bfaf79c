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

// Command-line front end: gen-data, train, eval, sweep-paths.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/experiment.hpp"

namespace {

using dmatrack::ExperimentConfig;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

ExperimentConfig resolve_config(const std::string& path, std::optional<std::uint64_t> seed) {
  auto config = path.empty() ? ExperimentConfig{} : ExperimentConfig::load(path);
  if (seed) {
    config.seed = *seed;
  }
  config.validate();
  return config;
}

void print_report(const dmatrack::EvalReport& report) {
  std::printf("%-12s %12s %10s\n", "method", "mean_err[m]", "time[s]");
  for (const auto& method : dmatrack::kEvalMethods) {
    std::printf("%-12s %12.4f %10.3f\n", method.c_str(), report.aggregate.at(method),
                report.seconds.at(method));
  }
  std::printf("%-12s %12.4f\n", "centroid", report.centroid_error);
  std::printf("test steps: %zu, fingerprint db build: %.3f s\n", report.test_steps,
              report.seconds.at("fingerprint_db_build"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMA channel-based user tracking experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::string ckpt_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> counts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config (defaults if omitted)");
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->add_option("--seed", seed, "Override the config seed");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a dataset and train/test split");
  add_common(gen);
  auto* train = app.add_subcommand("train", "Train the mMHSA network and the AR refiner");
  add_common(train);
  train->add_option("--data", data_dir, "Dataset directory")->required();
  auto* eval = app.add_subcommand("eval", "Evaluate mMHSA, mMHSA+AR and fingerprinting");
  add_common(eval);
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--checkpoints", ckpt_dir, "Directory written by train")->required();
  auto* sweep = app.add_subcommand("sweep-paths", "Repeat the pipeline per multipath count");
  add_common(sweep);
  sweep->add_option("--paths", counts, "Path counts")->default_val(std::vector<std::size_t>{1, 2, 3, 4, 5, 6});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    const auto config = resolve_config(config_path, seed);
    if (gen->parsed()) {
      dmatrack::cmd_gen_data(config, out_dir);
      std::printf("wrote dataset to %s\n", out_dir.c_str());
    } else if (train->parsed()) {
      const auto s = dmatrack::cmd_train(config, data_dir, out_dir);
      std::printf("mMHSA final loss %.4f m, AR final loss %.4f m (gamma %.4f, z %.4f %.4f)\n",
                  s.mmhsa_loss.back(), s.ar_loss.back(), s.ar.gamma, s.ar.z.x, s.ar.z.y);
    } else if (eval->parsed()) {
      print_report(dmatrack::cmd_eval(config, data_dir, ckpt_dir, out_dir));
    } else if (sweep->parsed()) {
      const auto results = dmatrack::cmd_sweep_paths(config, counts, out_dir);
      for (const auto& [n, report] : results) {
        std::printf("n_paths=%zu\n", n);
        print_report(report);
      }
      if (results.size() != counts.size()) {
        std::fprintf(stderr, "some path counts failed; see %s/sweep_failures.txt\n", out_dir.c_str());
        return kExitRuntime;
      }
    }
  } catch (const dmatrack::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
