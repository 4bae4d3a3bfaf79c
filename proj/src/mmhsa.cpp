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

#include "dmatrack/mmhsa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "json.hpp"

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/rng.hpp"

namespace dmatrack {

namespace {

constexpr double kTokenInitStddev = 0.02;
// Keeps the distance loss differentiable when prediction equals target.
constexpr double kDistanceEpsilon = 1e-12;

Tensor xavier(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(fan_in * fan_out);
  for (auto& v : w) {
    v = dist(rng);
  }
  return Tensor::from_data({fan_in, fan_out}, std::move(w), true);
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

template <typename Fn>
void for_each_param(const MmhsaParams& p, Fn&& fn) {
  fn("patch/weight", p.patch_weight);
  fn("patch/bias", p.patch_bias);
  fn("tokens", p.tokens);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    const std::string pre = "blocks/" + std::to_string(b) + "/";
    fn(pre + "ln1/gain", blk.ln1_gain);
    fn(pre + "ln1/shift", blk.ln1_shift);
    fn(pre + "attn/wq", blk.wq);
    fn(pre + "attn/bq", blk.bq);
    fn(pre + "attn/wk", blk.wk);
    fn(pre + "attn/bk", blk.bk);
    fn(pre + "attn/wv", blk.wv);
    fn(pre + "attn/bv", blk.bv);
    fn(pre + "attn/wo", blk.wo);
    fn(pre + "attn/bo", blk.bo);
    fn(pre + "ln2/gain", blk.ln2_gain);
    fn(pre + "ln2/shift", blk.ln2_shift);
    fn(pre + "mlp/fc1/weight", blk.fc1_weight);
    fn(pre + "mlp/fc1/bias", blk.fc1_bias);
    fn(pre + "mlp/fc2/weight", blk.fc2_weight);
    fn(pre + "mlp/fc2/bias", blk.fc2_bias);
  }
  fn("final_ln/gain", p.final_gain);
  fn("final_ln/shift", p.final_shift);
  fn("head/fc1/weight", p.head_fc1_weight);
  fn("head/fc1/bias", p.head_fc1_bias);
  fn("head/fc2/weight", p.head_fc2_weight);
  fn("head/fc2/bias", p.head_fc2_bias);
}

// Mutable twin of for_each_param, same order.
template <typename Fn>
void for_each_param_mut(MmhsaParams& p, Fn&& fn) {
  fn(p.patch_weight);
  fn(p.patch_bias);
  fn(p.tokens);
  for (auto& blk : p.blocks) {
    for (Tensor* t : {&blk.ln1_gain, &blk.ln1_shift, &blk.wq, &blk.bq, &blk.wk, &blk.bk, &blk.wv,
                      &blk.bv, &blk.wo, &blk.bo, &blk.ln2_gain, &blk.ln2_shift, &blk.fc1_weight,
                      &blk.fc1_bias, &blk.fc2_weight, &blk.fc2_bias}) {
      fn(*t);
    }
  }
  fn(p.final_gain);
  fn(p.final_shift);
  fn(p.head_fc1_weight);
  fn(p.head_fc1_bias);
  fn(p.head_fc2_weight);
  fn(p.head_fc2_bias);
}

}  // namespace

MmhsaConfig MmhsaConfig::for_input(std::size_t n_elements, std::size_t n_subcarriers) {
  MmhsaConfig c;
  c.n_elements = n_elements;
  c.n_subcarriers = n_subcarriers;
  c.pe_frequency = 2.0 * static_cast<double>(n_elements);
  return c;
}

void MmhsaConfig::validate() const {
  if (patch_size == 0 || n_elements % patch_size != 0 || (2 * n_subcarriers) % patch_size != 0) {
    throw ConfigError("MmhsaConfig: patch size " + std::to_string(patch_size) +
                      " must divide N=" + std::to_string(n_elements) +
                      " and 2L=" + std::to_string(2 * n_subcarriers));
  }
  if (n_heads == 0 || d_hidden == 0 || d_hidden % n_heads != 0) {
    throw ConfigError("MmhsaConfig: d_hidden " + std::to_string(d_hidden) +
                      " must be divisible by n_heads " + std::to_string(n_heads));
  }
  if (d_hidden % 2 != 0) {
    throw ConfigError("MmhsaConfig: d_hidden must be even for sinusoidal embeddings");
  }
  if (n_blocks < 1 || mlp_ratio < 1 || head_hidden < 1) {
    throw ConfigError("MmhsaConfig: n_blocks, mlp_ratio and head_hidden must be positive");
  }
  if (!(pe_frequency > 1.0) || !(input_scale > 0.0) || !std::isfinite(input_scale)) {
    throw ConfigError("MmhsaConfig: pe_frequency must exceed 1 and input_scale be positive");
  }
}

MmhsaParams MmhsaParams::init(const MmhsaConfig& config, std::uint64_t seed, Vec2 output_bias) {
  config.validate();
  Rng rng(seed);
  const auto d = config.d_hidden;
  const auto p2 = config.patch_size * config.patch_size;
  const auto hidden = config.mlp_ratio * d;
  MmhsaParams p;
  p.patch_weight = xavier(rng, p2, d);
  p.patch_bias = Tensor::zeros({d}, true);
  std::normal_distribution<double> token_dist(0.0, kTokenInitStddev);
  std::vector<double> tok(2 * d);
  for (auto& v : tok) {
    v = token_dist(rng);
  }
  p.tokens = Tensor::from_data({2, d}, std::move(tok), true);
  for (std::size_t b = 0; b < config.n_blocks; ++b) {
    EncoderBlockParams blk;
    blk.ln1_gain = Tensor::full({d}, 1.0, true);
    blk.ln1_shift = Tensor::zeros({d}, true);
    blk.wq = xavier(rng, d, d);
    blk.bq = Tensor::zeros({d}, true);
    blk.wk = xavier(rng, d, d);
    blk.bk = Tensor::zeros({d}, true);
    blk.wv = xavier(rng, d, d);
    blk.bv = Tensor::zeros({d}, true);
    blk.wo = xavier(rng, d, d);
    blk.bo = Tensor::zeros({d}, true);
    blk.ln2_gain = Tensor::full({d}, 1.0, true);
    blk.ln2_shift = Tensor::zeros({d}, true);
    blk.fc1_weight = xavier(rng, d, hidden);
    blk.fc1_bias = Tensor::zeros({hidden}, true);
    blk.fc2_weight = xavier(rng, hidden, d);
    blk.fc2_bias = Tensor::zeros({d}, true);
    p.blocks.push_back(std::move(blk));
  }
  p.final_gain = Tensor::full({d}, 1.0, true);
  p.final_shift = Tensor::zeros({d}, true);
  p.head_fc1_weight = xavier(rng, 2 * d, config.head_hidden);
  p.head_fc1_bias = Tensor::zeros({config.head_hidden}, true);
  p.head_fc2_weight = xavier(rng, config.head_hidden, 2);
  p.head_fc2_bias = Tensor::from_data({2}, {output_bias.x, output_bias.y}, true);
  return p;
}

MmhsaParams MmhsaParams::from_named(const MmhsaConfig& config,
                                    const std::vector<NamedTensor>& named) {
  // Shapes and key order come from a freshly initialized template.
  MmhsaParams p = init(config, 0);
  const auto expected = p.named();
  if (expected.size() != named.size()) {
    throw FormatError("mMHSA checkpoint: expected " + std::to_string(expected.size()) +
                      " tensors, found " + std::to_string(named.size()));
  }
  std::size_t k = 0;
  for_each_param_mut(p, [&](Tensor& t) {
    if (named[k].key != expected[k].key || named[k].tensor.shape() != t.shape()) {
      throw FormatError("mMHSA checkpoint: tensor '" + named[k].key + "' " +
                        to_string(named[k].tensor.shape()) + " does not match '" +
                        expected[k].key + "' " + to_string(t.shape()));
    }
    t = named[k].tensor.detach(true);
    ++k;
  });
  return p;
}

std::vector<NamedTensor> MmhsaParams::named() const {
  std::vector<NamedTensor> out;
  for_each_param(*this, [&](const std::string& key, const Tensor& t) { out.push_back({key, t}); });
  return out;
}

std::vector<Tensor> MmhsaParams::list() const {
  std::vector<Tensor> out;
  for_each_param(*this, [&](const std::string&, const Tensor& t) { out.push_back(t); });
  return out;
}

MmhsaParams MmhsaParams::clone(bool requires_grad) const {
  MmhsaParams copy = *this;
  for_each_param_mut(copy, [&](Tensor& t) { t = t.detach(requires_grad); });
  return copy;
}

std::size_t MmhsaParams::parameter_count() const {
  std::size_t n = 0;
  for_each_param(*this, [&](const std::string&, const Tensor& t) { n += t.numel(); });
  return n;
}

Tensor patchify(const ChannelEstimate& estimate, const MmhsaConfig& config) {
  config.validate();
  if (estimate.n_elements != config.n_elements || estimate.n_subcarriers != config.n_subcarriers) {
    throw DimensionError("patchify: estimate is " + std::to_string(estimate.n_elements) + "x" +
                         std::to_string(estimate.n_subcarriers) + ", network expects " +
                         std::to_string(config.n_elements) + "x" +
                         std::to_string(config.n_subcarriers));
  }
  const auto n = config.n_elements;
  const auto l_count = config.n_subcarriers;
  const auto width = 2 * l_count;
  const auto p = config.patch_size;
  const auto tile_cols = width / p;
  const auto s = config.input_scale;

  // N x 2L image: columns [re l=0..L-1, im l=0..L-1].
  std::vector<double> image(n * width);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t l = 0; l < l_count; ++l) {
      image[e * width + l] = s * estimate.real_part[e * l_count + l];
      image[e * width + l_count + l] = s * estimate.imag_part[e * l_count + l];
    }
  }
  const auto count = config.num_patches();
  std::vector<double> patches(count * p * p);
  for (std::size_t tile = 0; tile < count; ++tile) {
    const auto r0 = (tile / tile_cols) * p;
    const auto c0 = (tile % tile_cols) * p;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) {
        patches[tile * p * p + a * p + b] = image[(r0 + a) * width + c0 + b];
      }
    }
  }
  return Tensor::from_data({count, p * p}, std::move(patches));
}

Tensor positional_embeddings(std::size_t count, std::size_t d, double base) {
  std::vector<double> pe(count * d);
  for (std::size_t pos = 0; pos < count; ++pos) {
    for (std::size_t k = 0; 2 * k < d; ++k) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(base, static_cast<double>(2 * k) / static_cast<double>(d));
      pe[pos * d + 2 * k] = std::sin(angle);
      if (2 * k + 1 < d) {
        pe[pos * d + 2 * k + 1] = std::cos(angle);
      }
    }
  }
  return Tensor::from_data({count, d}, std::move(pe));
}

Tensor embed(const Tensor& patches, const MmhsaParams& params, const MmhsaConfig& config) {
  const auto p2 = config.patch_size * config.patch_size;
  if (patches.rank() != 2 || patches.dim(1) != p2) {
    throw DimensionError("embed: patches of shape " + to_string(patches.shape()) +
                         ", expected [*, " + std::to_string(p2) + "]");
  }
  const auto projected = linear(patches, params.patch_weight, params.patch_bias);
  const auto sequence = concat({params.tokens, projected}, 0);
  return add(sequence, positional_embeddings(sequence.dim(0), config.d_hidden,
                                             config.pe_frequency));
}

Tensor encoder_block(const Tensor& tokens, const EncoderBlockParams& block,
                     const MmhsaConfig& config, std::vector<Tensor>* attention) {
  if (config.n_heads == 0 || config.d_hidden % config.n_heads != 0) {
    throw ConfigError("encoder_block: d_hidden not divisible by n_heads");
  }
  if (tokens.rank() != 2 || tokens.dim(1) != config.d_hidden) {
    throw DimensionError("encoder_block: tokens of shape " + to_string(tokens.shape()) +
                         ", expected [*, " + std::to_string(config.d_hidden) + "]");
  }
  const auto head_dim = config.d_hidden / config.n_heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const auto h = layer_norm(tokens, block.ln1_gain, block.ln1_shift);
  const auto q = linear(h, block.wq, block.bq);
  const auto k = linear(h, block.wk, block.bk);
  const auto v = linear(h, block.wv, block.bv);
  std::vector<Tensor> heads;
  heads.reserve(config.n_heads);
  for (std::size_t hd = 0; hd < config.n_heads; ++hd) {
    const auto c0 = hd * head_dim;
    const auto c1 = c0 + head_dim;
    const auto qh = slice(q, 1, c0, c1);
    const auto kh = slice(k, 1, c0, c1);
    const auto vh = slice(v, 1, c0, c1);
    const auto weights = softmax(scale(matmul(qh, transpose(kh)), attn_scale));
    if (attention != nullptr) {
      attention->push_back(weights);
    }
    heads.push_back(matmul(weights, vh));
  }
  const auto merged = heads.size() == 1 ? heads.front() : concat(heads, 1);
  auto x = add(tokens, linear(merged, block.wo, block.bo));

  const auto h2 = layer_norm(x, block.ln2_gain, block.ln2_shift);
  const auto mlp = linear(gelu(linear(h2, block.fc1_weight, block.fc1_bias)), block.fc2_weight,
                          block.fc2_bias);
  return add(x, mlp);
}

Tensor forward_tensor(const ChannelEstimate& estimate, const MmhsaParams& params,
                      const MmhsaConfig& config) {
  auto x = embed(patchify(estimate, config), params, config);
  for (const auto& block : params.blocks) {
    x = encoder_block(x, block, config);
  }
  x = layer_norm(x, params.final_gain, params.final_shift);
  const auto pooled = reshape(slice(x, 0, 0, 2), {1, 2 * config.d_hidden});
  const auto hidden = gelu(linear(pooled, params.head_fc1_weight, params.head_fc1_bias));
  return reshape(linear(hidden, params.head_fc2_weight, params.head_fc2_bias), {2});
}

Vec2 forward(const ChannelEstimate& estimate, const MmhsaParams& params,
             const MmhsaConfig& config) {
  const auto out = forward_tensor(estimate, params, config);
  return {out.data()[0], out.data()[1]};
}

std::vector<Vec2> forward_batch(std::span<const ChannelEstimate* const> estimates,
                                const MmhsaParams& params, const MmhsaConfig& config) {
  // A gradient-free snapshot so no graph is recorded and threads share nothing mutable.
  const MmhsaParams frozen = params.clone(false);
  std::vector<Vec2> out(estimates.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(estimates.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = forward(*estimates[k], frozen, config);
  }
  return out;
}

Tensor distance_loss(const Tensor& prediction, const Vec2& target) {
  const auto diff = sub(prediction, Tensor::from_data({2}, {target.x, target.y}));
  return sqrt(add_scalar(sum(square(diff)), kDistanceEpsilon));
}

double input_scale_for(std::span<const LabeledEstimate> samples) {
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < s.estimate->real_part.size(); ++k) {
      sum_sq += s.estimate->real_part[k] * s.estimate->real_part[k] +
                s.estimate->imag_part[k] * s.estimate->imag_part[k];
    }
    count += 2 * s.estimate->real_part.size();
  }
  if (count == 0 || sum_sq <= 0.0) {
    return 1.0;
  }
  return 1.0 / std::sqrt(sum_sq / static_cast<double>(count));
}

double evaluate_loss(std::span<const LabeledEstimate> samples, const MmhsaParams& params,
                     const MmhsaConfig& config) {
  std::vector<const ChannelEstimate*> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) {
    inputs.push_back(s.estimate);
  }
  const auto preds = forward_batch(inputs, params, config);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    total += distance(preds[i], samples[i].position);
  }
  return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

MmhsaTrainResult train_mmhsa(std::span<const LabeledEstimate> samples, const MmhsaConfig& config,
                             const MmhsaTrainOptions& options, const MmhsaParams* initial) {
  config.validate();
  if (samples.empty()) {
    throw DomainError("train_mmhsa: empty dataset");
  }
  if (options.batch_size == 0) {
    throw ConfigError("train_mmhsa: batch_size must be positive");
  }
  MmhsaTrainResult result;
  if (initial != nullptr) {
    result.params = initial->clone(true);
  } else {
    Vec2 mean_target;
    for (const auto& s : samples) {
      mean_target.x += s.position.x;
      mean_target.y += s.position.y;
    }
    mean_target.x /= static_cast<double>(samples.size());
    mean_target.y /= static_cast<double>(samples.size());
    result.params = MmhsaParams::init(config, derive_seed(options.seed, "mmhsa-init"), mean_target);
  }
  auto params = result.params.list();
  std::vector<std::size_t> offsets(params.size() + 1, 0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    offsets[i + 1] = offsets[i] + params[i].numel();
  }
  const auto total_params = offsets.back();

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<double>> sample_grads(options.batch_size,
                                                std::vector<double>(total_params));
  std::vector<double> sample_loss(options.batch_size);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng(derive_seed(options.seed, "mmhsa-epoch", epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const auto count = std::min(options.batch_size, order.size() - start);
      const double weight = 1.0 / static_cast<double>(count);

#pragma omp parallel for schedule(dynamic)
      for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(count); ++bi) {
        const auto b = static_cast<std::size_t>(bi);
        const auto& sample = samples[order[start + b]];
        const MmhsaParams local = result.params.clone(true);
        auto loss = distance_loss(forward_tensor(*sample.estimate, local, config), sample.position);
        sample_loss[b] = loss.item();
        scale(loss, weight).backward();
        const auto local_list = local.list();
        for (std::size_t i = 0; i < local_list.size(); ++i) {
          auto& dst = sample_grads[b];
          if (local_list[i].has_grad()) {
            std::copy(local_list[i].grad().begin(), local_list[i].grad().end(),
                      dst.begin() + static_cast<std::ptrdiff_t>(offsets[i]));
          } else {
            std::fill(dst.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                      dst.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]), 0.0);
          }
        }
      }

      for (std::size_t b = 0; b < count; ++b) {
        if (!std::isfinite(sample_loss[b])) {
          throw TrainingError("train_mmhsa: non-finite loss at epoch " + std::to_string(epoch) +
                              ", sample " + std::to_string(order[start + b]));
        }
        epoch_loss += sample_loss[b];
      }
      // Fixed-order reduction keeps the update independent of the schedule.
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto grad = params[i].mutable_grad();
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = 0; b < count; ++b) {
          const auto& g = sample_grads[b];
          for (std::size_t k = 0; k < grad.size(); ++k) {
            grad[k] += g[offsets[i] + k];
          }
        }
      }
      sgd_step(params, options.learning_rate);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

void save_mmhsa(const std::filesystem::path& dir, const MmhsaConfig& config,
                const MmhsaParams& params) {
  save_checkpoint(dir, "mmhsa", params.named());
  nlohmann::ordered_json j;
  j["n_elements"] = config.n_elements;
  j["n_subcarriers"] = config.n_subcarriers;
  j["patch_size"] = config.patch_size;
  j["d_hidden"] = config.d_hidden;
  j["n_blocks"] = config.n_blocks;
  j["n_heads"] = config.n_heads;
  j["mlp_ratio"] = config.mlp_ratio;
  j["head_hidden"] = config.head_hidden;
  j["pe_frequency"] = config.pe_frequency;
  j["input_scale"] = config.input_scale;
  io::write_text_file(dir / "mmhsa_config.json", j.dump(2) + "\n");
}

LoadedMmhsa load_mmhsa(const std::filesystem::path& dir) {
  LoadedMmhsa out;
  try {
    const auto j = nlohmann::json::parse(io::read_text_file(dir / "mmhsa_config.json"));
    auto& c = out.config;
    c.n_elements = j.at("n_elements");
    c.n_subcarriers = j.at("n_subcarriers");
    c.patch_size = j.at("patch_size");
    c.d_hidden = j.at("d_hidden");
    c.n_blocks = j.at("n_blocks");
    c.n_heads = j.at("n_heads");
    c.mlp_ratio = j.at("mlp_ratio");
    c.head_hidden = j.at("head_hidden");
    c.pe_frequency = j.at("pe_frequency");
    c.input_scale = j.at("input_scale");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("mmhsa_config.json: " + std::string(e.what()));
  }
  out.params = MmhsaParams::from_named(out.config, load_checkpoint(dir, "mmhsa"));
  return out;
}

}  // namespace dmatrack
