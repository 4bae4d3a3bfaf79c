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

#include "dmatrack/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"

namespace dmatrack {

namespace {
constexpr const char* kFormat = "dmatrack-weights";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const std::string& stem,
                     const std::vector<NamedTensor>& tensors) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["blob"] = stem + ".bin";
  auto& params = manifest["params"] = nlohmann::ordered_json::array();

  std::ofstream blob(dir / (stem + ".bin"), std::ios::binary);
  if (!blob) {
    throw std::runtime_error("cannot write " + (dir / (stem + ".bin")).string());
  }
  for (const auto& [key, tensor] : tensors) {
    nlohmann::ordered_json entry;
    entry["key"] = key;
    entry["shape"] = tensor.shape();
    params.push_back(std::move(entry));
    io::write_f64s(blob, tensor.data());
  }
  io::write_text_file(dir / (stem + ".json"), manifest.dump(2) + "\n");
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& dir,
                                         const std::string& stem) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text_file(dir / (stem + ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint manifest " + stem + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
    throw FormatError("checkpoint " + stem + ": unsupported format");
  }
  std::ifstream blob(dir / manifest.at("blob").get<std::string>(), std::ios::binary);
  if (!blob) {
    throw FormatError("checkpoint " + stem + ": missing blob");
  }
  std::vector<NamedTensor> out;
  for (const auto& entry : manifest.at("params")) {
    auto shape = entry.at("shape").get<Shape>();
    std::size_t n = 1;
    for (auto d : shape) {
      n *= d;
    }
    out.push_back({entry.at("key").get<std::string>(),
                   Tensor::from_data(std::move(shape), io::read_f64s(blob, n))});
  }
  if (blob.peek() != std::char_traits<char>::eof()) {
    throw FormatError("checkpoint " + stem + ": blob longer than manifest");
  }
  return out;
}

}  // namespace dmatrack
