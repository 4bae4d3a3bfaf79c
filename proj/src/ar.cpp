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

#include "dmatrack/ar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmatrack/checkpoint.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/rng.hpp"
#include "dmatrack/tensor.hpp"

namespace dmatrack {

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec2 ar_predict(std::span<const Vec2> history, const ArParams& params) {
  if (history.empty()) {
    throw DomainError("ar_predict: empty history");
  }
  const double decay = logistic(params.gamma);
  const auto t = history.size();
  Vec2 out;
  for (std::size_t k = 0; k < t; ++k) {
    const double w = std::pow(decay, static_cast<double>(t - k));
    out.x += w * params.z.x * history[k].x;
    out.y += w * params.z.y * history[k].y;
  }
  return out;
}

ArTracker::ArTracker(const ArParams& params) : decay_(logistic(params.gamma)), z_(params.z) {}

Vec2 ArTracker::push(const Vec2& estimate) {
  state_.x = decay_ * (state_.x + z_.x * estimate.x);
  state_.y = decay_ * (state_.y + z_.y * estimate.y);
  ++steps_;
  return state_;
}

std::vector<Vec2> ar_smooth(std::span<const Vec2> history, const ArParams& params) {
  ArTracker tracker(params);
  std::vector<Vec2> out;
  out.reserve(history.size());
  for (const auto& p : history) {
    out.push_back(tracker.push(p));
  }
  return out;
}

namespace {

void check_trajectories(std::span<const ArTrajectory> trajectories) {
  if (trajectories.empty()) {
    throw DomainError("AR: empty dataset");
  }
  for (const auto& t : trajectories) {
    if (t.truths.size() != t.predictions.size()) {
      throw DimensionError("AR: trajectory has " + std::to_string(t.truths.size()) +
                           " truths but " + std::to_string(t.predictions.size()) +
                           " predictions");
    }
  }
}

std::size_t total_steps(std::span<const ArTrajectory> trajectories) {
  std::size_t n = 0;
  for (const auto& t : trajectories) {
    n += t.truths.size();
  }
  return n;
}

// Sum (not mean) of per-step distances for a set of trajectories, recorded on the graph.
Tensor summed_distance(std::span<const ArTrajectory* const> batch, const Tensor& gamma,
                       const Tensor& z) {
  const auto decay = sigmoid(gamma);
  std::vector<Tensor> terms;
  for (const ArTrajectory* traj : batch) {
    Tensor state;
    for (std::size_t t = 0; t < traj->predictions.size(); ++t) {
      const auto& p = traj->predictions[t];
      const auto& truth = traj->truths[t];
      auto contribution = mul(z, Tensor::from_data({2}, {p.x, p.y}));
      state = mul(decay, state.defined() ? add(state, contribution) : contribution);
      terms.push_back(distance_loss(state, truth));
    }
  }
  return sum(concat([&] {
    std::vector<Tensor> flat;
    flat.reserve(terms.size());
    for (const auto& t : terms) {
      flat.push_back(reshape(t, {1}));
    }
    return flat;
  }(), 0));
}

}  // namespace

double ar_loss(std::span<const ArTrajectory> trajectories, const ArParams& params) {
  check_trajectories(trajectories);
  double total = 0.0;
  for (const auto& traj : trajectories) {
    for (std::size_t t = 0; t < traj.predictions.size(); ++t) {
      const auto est = ar_predict(std::span(traj.predictions).first(t + 1), params);
      total += distance(est, traj.truths[t]);
    }
  }
  return total / static_cast<double>(total_steps(trajectories));
}

ArLossGradient ar_loss_gradient(std::span<const ArTrajectory> trajectories,
                                const ArParams& params) {
  check_trajectories(trajectories);
  auto gamma = Tensor::from_data({1}, {params.gamma}, true);
  auto z = Tensor::from_data({2}, {params.z.x, params.z.y}, true);
  std::vector<const ArTrajectory*> all;
  for (const auto& t : trajectories) {
    all.push_back(&t);
  }
  auto loss = scale(summed_distance(all, gamma, z),
                    1.0 / static_cast<double>(total_steps(trajectories)));
  loss.backward();
  return {loss.item(), gamma.grad()[0], {z.grad()[0], z.grad()[1]}};
}

ArTrainResult ar_train(std::span<const ArTrajectory> trajectories, const ArTrainOptions& options,
                       const ArParams& init) {
  check_trajectories(trajectories);
  if (options.batch_trajectories == 0) {
    throw ConfigError("ar_train: batch_trajectories must be positive");
  }
  std::vector<Tensor> params{Tensor::from_data({1}, {init.gamma}, true),
                             Tensor::from_data({2}, {init.z.x, init.z.y}, true)};
  std::vector<std::size_t> order(trajectories.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ArTrainResult result;
  const double all_steps = static_cast<double>(total_steps(trajectories));
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng(derive_seed(options.seed, "ar-epoch", epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_trajectories) {
      const auto count = std::min(options.batch_trajectories, order.size() - start);
      std::vector<const ArTrajectory*> batch;
      std::size_t steps = 0;
      for (std::size_t b = 0; b < count; ++b) {
        batch.push_back(&trajectories[order[start + b]]);
        steps += batch.back()->truths.size();
      }
      if (steps == 0) {
        continue;
      }
      auto summed = summed_distance(batch, params[0], params[1]);
      const double batch_sum = summed.item();
      if (!std::isfinite(batch_sum)) {
        throw TrainingError("ar_train: non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_sum;
      scale(summed, 1.0 / static_cast<double>(steps)).backward();
      sgd_step(params, options.learning_rate);
    }
    result.loss_history.push_back(epoch_loss / all_steps);
  }
  result.params.gamma = params[0].data()[0];
  result.params.z = {params[1].data()[0], params[1].data()[1]};
  return result;
}

std::vector<Vec2> track(std::span<const ChannelEstimate> estimates, const MmhsaParams& mmhsa,
                        const MmhsaConfig& config, const ArParams& ar) {
  std::vector<const ChannelEstimate*> inputs;
  inputs.reserve(estimates.size());
  for (const auto& e : estimates) {
    inputs.push_back(&e);
  }
  return ar_smooth(forward_batch(inputs, mmhsa, config), ar);
}

void save_ar(const std::filesystem::path& dir, const ArParams& params) {
  save_checkpoint(dir, "ar",
                  {{"ar/gamma", Tensor::scalar(params.gamma)},
                   {"ar/z_x", Tensor::scalar(params.z.x)},
                   {"ar/z_y", Tensor::scalar(params.z.y)}});
}

ArParams load_ar(const std::filesystem::path& dir) {
  const auto named = load_checkpoint(dir, "ar");
  if (named.size() != 3 || named[0].key != "ar/gamma" || named[1].key != "ar/z_x" ||
      named[2].key != "ar/z_y") {
    throw FormatError("AR checkpoint: expected ar/gamma, ar/z_x, ar/z_y");
  }
  return {named[0].tensor.item(), {named[1].tensor.item(), named[2].tensor.item()}};
}

}  // namespace dmatrack
