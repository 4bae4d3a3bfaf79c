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

#ifndef DMATRACK_MMHSA_HPP
#define DMATRACK_MMHSA_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dmatrack/channel_sim.hpp"
#include "dmatrack/checkpoint.hpp"
#include "dmatrack/dma.hpp"
#include "dmatrack/tensor.hpp"

/**
 * \file
 * \brief Attention-based regression from a channel estimate to a 2D position.
 *
 * The 2 x N x L estimate is laid out as an N x 2L image (real subcarriers
 * first, then imaginary), cut into p x p patches, linearly embedded, and
 * prefixed with two learnable estimation tokens. Sinusoidal positional
 * embeddings with base 2N are added to every token. After the pre-norm
 * encoder blocks and a final layer norm, the two estimation tokens are
 * concatenated and a one-hidden-layer GELU head emits (x, y) in meters.
 */

namespace dmatrack {

struct MmhsaConfig {
  std::size_t n_elements = 256;
  std::size_t n_subcarriers = 4;
  std::size_t patch_size = 4;
  std::size_t d_hidden = 16;
  std::size_t n_blocks = 3;
  std::size_t n_heads = 2;
  std::size_t mlp_ratio = 2;
  std::size_t head_hidden = 32;
  double pe_frequency = 512.0;
  /// Multiplies every channel value before patching; fixed from training data.
  double input_scale = 1.0;

  /// Defaults for an N x L input, with pe_frequency = 2N.
  static MmhsaConfig for_input(std::size_t n_elements, std::size_t n_subcarriers);

  void validate() const;
  [[nodiscard]] std::size_t num_patches() const {
    return (n_elements / patch_size) * (2 * n_subcarriers / patch_size);
  }
  [[nodiscard]] std::size_t num_tokens() const { return num_patches() + 2; }
};

struct EncoderBlockParams {
  Tensor ln1_gain, ln1_shift;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_shift;
  Tensor fc1_weight, fc1_bias, fc2_weight, fc2_bias;
};

struct MmhsaParams {
  Tensor patch_weight, patch_bias;
  Tensor tokens;  // [2, d_hidden]
  std::vector<EncoderBlockParams> blocks;
  Tensor final_gain, final_shift;
  Tensor head_fc1_weight, head_fc1_bias, head_fc2_weight, head_fc2_bias;

  /// Random initialization. The output bias starts at `output_bias` (typically
  /// the mean training position) so the untrained net predicts that point.
  static MmhsaParams init(const MmhsaConfig& config, std::uint64_t seed, Vec2 output_bias = {});
  static MmhsaParams from_named(const MmhsaConfig& config, const std::vector<NamedTensor>& named);

  [[nodiscard]] std::vector<NamedTensor> named() const;
  [[nodiscard]] std::vector<Tensor> list() const;
  /// Deep copy; the copies are fresh leaves.
  [[nodiscard]] MmhsaParams clone(bool requires_grad) const;
  [[nodiscard]] std::size_t parameter_count() const;
};

/// [num_patches, p^2] constant tensor.
Tensor patchify(const ChannelEstimate& estimate, const MmhsaConfig& config);

/// [count, d] sinusoidal table: sin/cos(pos / base^(2k/d)) on even/odd columns.
Tensor positional_embeddings(std::size_t count, std::size_t d, double base);

/// Linear patch embedding, estimation tokens at rows 0 and 1, plus positional embeddings.
Tensor embed(const Tensor& patches, const MmhsaParams& params, const MmhsaConfig& config);

/// Pre-norm transformer block. When `attention` is non-null it receives one
/// [tokens, tokens] weight matrix per head.
Tensor encoder_block(const Tensor& tokens, const EncoderBlockParams& block,
                     const MmhsaConfig& config, std::vector<Tensor>* attention = nullptr);

/// Full network; returns a rank-1 tensor of 2 coordinates.
Tensor forward_tensor(const ChannelEstimate& estimate, const MmhsaParams& params,
                      const MmhsaConfig& config);
Vec2 forward(const ChannelEstimate& estimate, const MmhsaParams& params, const MmhsaConfig& config);

/// Predictions for many estimates; evaluated in parallel over a frozen snapshot.
std::vector<Vec2> forward_batch(std::span<const ChannelEstimate* const> estimates,
                                const MmhsaParams& params, const MmhsaConfig& config);

struct LabeledEstimate {
  const ChannelEstimate* estimate = nullptr;
  Vec2 position;
};

/// Euclidean distance between prediction and target, as a differentiable scalar.
Tensor distance_loss(const Tensor& prediction, const Vec2& target);

/// 1 / RMS of all channel values in the samples.
double input_scale_for(std::span<const LabeledEstimate> samples);

/// Mean distance loss of `params` over `samples`.
double evaluate_loss(std::span<const LabeledEstimate> samples, const MmhsaParams& params,
                     const MmhsaConfig& config);

struct MmhsaTrainOptions {
  double learning_rate = 0.002;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct MmhsaTrainResult {
  MmhsaParams params;
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Minibatch SGD on the mean Euclidean distance. Per-sample gradients are
/// computed in parallel and reduced in sample order, so results do not depend
/// on the thread count. When `initial` is null the parameters are initialized
/// from the seed with the output bias at the mean target.
MmhsaTrainResult train_mmhsa(std::span<const LabeledEstimate> samples, const MmhsaConfig& config,
                             const MmhsaTrainOptions& options,
                             const MmhsaParams* initial = nullptr);

/// Writes mmhsa.json, mmhsa.bin and the config sidecar mmhsa_config.json.
void save_mmhsa(const std::filesystem::path& dir, const MmhsaConfig& config,
                const MmhsaParams& params);
struct LoadedMmhsa {
  MmhsaConfig config;
  MmhsaParams params;
};
LoadedMmhsa load_mmhsa(const std::filesystem::path& dir);

}  // namespace dmatrack

#endif  // DMATRACK_MMHSA_HPP
