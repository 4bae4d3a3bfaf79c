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

#ifndef DMATRACK_AR_HPP
#define DMATRACK_AR_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dmatrack/channel_sim.hpp"
#include "dmatrack/mmhsa.hpp"

namespace dmatrack {

/// Exponentially decaying autoregressive refiner
///   p_hat(t) = sum_{k<=t} sigmoid(gamma)^(t-k+1) z * p_tilde(k)
/// with element-wise z. The weights are not normalized.
struct ArParams {
  double gamma = 2.0;
  Vec2 z{0.15, 0.15};
};

double logistic(double x);

/// Literal weighted sum over the whole history. Throws DomainError on an empty history.
Vec2 ar_predict(std::span<const Vec2> history, const ArParams& params);

/// O(1)-per-step causal form S(t) = sigmoid(gamma) * (S(t-1) + z * p_tilde(t)),
/// equal to ar_predict on every prefix.
class ArTracker {
 public:
  explicit ArTracker(const ArParams& params);
  Vec2 push(const Vec2& estimate);
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

 private:
  double decay_;
  Vec2 z_;
  Vec2 state_;
  std::size_t steps_ = 0;
};

/// ar_predict for every prefix of `history`.
std::vector<Vec2> ar_smooth(std::span<const Vec2> history, const ArParams& params);

struct ArTrajectory {
  std::vector<Vec2> truths;
  std::vector<Vec2> predictions;
};

/// Mean Euclidean error of the refiner over every (trajectory, step).
double ar_loss(std::span<const ArTrajectory> trajectories, const ArParams& params);

/// Loss and its gradient (d/dgamma, d/dz) through the autograd engine.
struct ArLossGradient {
  double loss = 0.0;
  double d_gamma = 0.0;
  Vec2 d_z;
};
ArLossGradient ar_loss_gradient(std::span<const ArTrajectory> trajectories, const ArParams& params);

struct ArTrainOptions {
  double learning_rate = 0.002;
  std::size_t epochs = 60;
  std::size_t batch_trajectories = 1;
  std::uint64_t seed = 0;
};

struct ArTrainResult {
  ArParams params;
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Minibatch SGD over trajectories.
ArTrainResult ar_train(std::span<const ArTrajectory> trajectories, const ArTrainOptions& options,
                       const ArParams& init = {});

/// mMHSA per step followed by the causal refiner: element t depends only on steps <= t.
std::vector<Vec2> track(std::span<const ChannelEstimate> estimates, const MmhsaParams& mmhsa,
                        const MmhsaConfig& config, const ArParams& ar);

/// ar.json / ar.bin with keys ar/gamma, ar/z_x, ar/z_y.
void save_ar(const std::filesystem::path& dir, const ArParams& params);
ArParams load_ar(const std::filesystem::path& dir);

}  // namespace dmatrack

#endif  // DMATRACK_AR_HPP
