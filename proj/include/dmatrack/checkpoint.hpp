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

#ifndef DMATRACK_CHECKPOINT_HPP
#define DMATRACK_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "dmatrack/tensor.hpp"

// Weight checkpoints: a JSON manifest listing (key, shape) per parameter and
// a sibling blob of little-endian f64 values concatenated in manifest order.
namespace dmatrack {

struct NamedTensor {
  std::string key;
  Tensor tensor;
};

/// Writes `<stem>.json` and `<stem>.bin` under `dir`.
void save_checkpoint(const std::filesystem::path& dir, const std::string& stem,
                     const std::vector<NamedTensor>& tensors);

/// Reads a checkpoint back as leaves (requires_grad = false), in manifest order.
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& dir, const std::string& stem);

}  // namespace dmatrack

#endif  // DMATRACK_CHECKPOINT_HPP
