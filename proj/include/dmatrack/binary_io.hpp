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

#ifndef DMATRACK_BINARY_IO_HPP
#define DMATRACK_BINARY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

// Little-endian primitives shared by every on-disk format in the library.
namespace dmatrack::io {

void write_u16(std::ostream& os, std::uint16_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_f64(std::ostream& os, double v);
void write_f64s(std::ostream& os, std::span<const double> values);

std::uint16_t read_u16(std::istream& is);
std::uint32_t read_u32(std::istream& is);
double read_f64(std::istream& is);
std::vector<double> read_f64s(std::istream& is, std::size_t count);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dmatrack::io

#endif  // DMATRACK_BINARY_IO_HPP
