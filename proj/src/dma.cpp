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

#include "dmatrack/dma.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "dmatrack/binary_io.hpp"
#include "dmatrack/errors.hpp"
#include "dmatrack/rng.hpp"

namespace dmatrack {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'A', 'C'};
constexpr double kUnitTolerance = 1e-12;

bool in_phase_range(double phase) { return phase >= kOffPhase && phase <= kFullPhase; }

}  // namespace

DmaGeometry DmaGeometry::uniform(std::size_t n_rf, std::size_t n_e, double wavelength,
                                 double permittivity) {
  DmaGeometry g;
  g.n_rf = n_rf;
  g.n_e = n_e;
  g.wavelength = wavelength;
  g.permittivity = permittivity;
  g.element_offsets.resize(n_e);
  for (std::size_t j = 0; j < n_e; ++j) {
    g.element_offsets[j] = static_cast<double>(j) * wavelength / 2.0;
  }
  g.p_max = static_cast<double>(n_rf * n_e);
  return g;
}

void DmaGeometry::validate() const {
  if (n_rf < 1 || n_e < 1) {
    throw DomainError("DmaGeometry: n_rf and n_e must be at least 1");
  }
  if (!(wavelength > 0.0) || !(permittivity > 0.0)) {
    throw DomainError("DmaGeometry: wavelength and permittivity must be positive");
  }
  if (element_offsets.size() != n_e) {
    throw DomainError("DmaGeometry: element_offsets has " +
                      std::to_string(element_offsets.size()) + " entries, expected " +
                      std::to_string(n_e));
  }
  for (std::size_t j = 0; j < n_e; ++j) {
    if (element_offsets[j] < 0.0 || (j > 0 && element_offsets[j] <= element_offsets[j - 1])) {
      throw DomainError("DmaGeometry: element_offsets must be non-negative and strictly increasing");
    }
  }
  if (!(p_max > 0.0)) {
    throw DomainError("DmaGeometry: p_max must be positive");
  }
}

PhaseShifts::PhaseShifts(std::vector<double> phases) : phases_(std::move(phases)) {
  for (double p : phases_) {
    if (!in_phase_range(p)) {
      throw DomainError("PhaseShifts: phase " + std::to_string(p) + " outside [-pi/2, pi/2]");
    }
  }
}

PhaseShifts PhaseShifts::constant(std::size_t n, double phase) {
  return PhaseShifts(std::vector<double>(n, phase));
}

double DmaWeights::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& w : weights) {
    s += std::norm(w);
  }
  return s;
}

ChannelTensor::ChannelTensor(std::size_t n, std::size_t l, std::vector<double> freqs)
    : n_elements(n), n_subcarriers(l), entries(n * l), subcarrier_freqs(std::move(freqs)) {
  if (subcarrier_freqs.size() != l) {
    throw DimensionError("ChannelTensor: " + std::to_string(subcarrier_freqs.size()) +
                         " subcarrier frequencies for L=" + std::to_string(l));
  }
}

void ChannelTensor::validate() const {
  if (entries.size() != n_elements * n_subcarriers || subcarrier_freqs.size() != n_subcarriers) {
    throw DimensionError("ChannelTensor: inconsistent dimensions");
  }
  for (const auto& h : entries) {
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) {
      throw DomainError("ChannelTensor: non-finite entry");
    }
  }
}

ChannelEstimate ChannelEstimate::from_channel(const ChannelTensor& channel, double noise_power) {
  ChannelEstimate e;
  e.n_elements = channel.n_elements;
  e.n_subcarriers = channel.n_subcarriers;
  e.real_part.resize(channel.entries.size());
  e.imag_part.resize(channel.entries.size());
  for (std::size_t k = 0; k < channel.entries.size(); ++k) {
    e.real_part[k] = channel.entries[k].real();
    e.imag_part[k] = channel.entries[k].imag();
  }
  e.noise_power = noise_power;
  return e;
}

void ChannelEstimate::validate() const {
  const auto n = n_elements * n_subcarriers;
  if (real_part.size() != n || imag_part.size() != n) {
    throw DimensionError("ChannelEstimate: inconsistent dimensions");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(real_part[k]) || !std::isfinite(imag_part[k])) {
      throw DomainError("ChannelEstimate: non-finite entry");
    }
  }
}

double wavenumber(double wavelength, double permittivity) {
  if (!(wavelength > 0.0) || !(permittivity > 0.0)) {
    throw DomainError("wavenumber: wavelength and permittivity must be positive");
  }
  return 2.0 * std::numbers::pi / wavelength * std::sqrt(permittivity);
}

cplx element_response(double phase, double rho, double beta) {
  if (!in_phase_range(phase)) {
    throw DomainError("element_response: phase " + std::to_string(phase) +
                      " outside [-pi/2, pi/2]");
  }
  if (phase == kOffPhase) {
    return {0.0, 0.0};
  }
  // 0.5 (j + e^{j phase}) = cos(pi/4 - phase/2) e^{j (pi/4 + phase/2)}
  const double magnitude = std::cos(std::numbers::pi / 4.0 - phase / 2.0);
  return std::polar(magnitude, std::numbers::pi / 4.0 + phase / 2.0 + rho * beta);
}

DmaWeights build_weights(const DmaGeometry& geometry, const PhaseShifts& phases) {
  geometry.validate();
  const auto n = geometry.num_elements();
  if (phases.size() != n) {
    throw DimensionError("build_weights: " + std::to_string(phases.size()) +
                         " phases for N=" + std::to_string(n));
  }
  const double beta = wavenumber(geometry.wavelength, geometry.permittivity);
  DmaWeights w;
  w.weights.resize(n);
  const auto values = phases.values();
  for (std::size_t i = 0; i < geometry.n_rf; ++i) {
    for (std::size_t j = 0; j < geometry.n_e; ++j) {
      const auto k = geometry.index(i, j);
      w.weights[k] = element_response(values[k], geometry.element_offsets[j], beta);
    }
  }
  const double power = w.squared_norm();
  if (power > geometry.p_max * (1.0 + 1e-12)) {
    throw ConstraintError("build_weights: squared norm " + std::to_string(power) +
                          " exceeds p_max " + std::to_string(geometry.p_max));
  }
  return w;
}

ReceivedSignal receive(const DmaGeometry& geometry, const DmaWeights& weights,
                       const ChannelTensor& channel, cplx pilot, double noise_power,
                       std::uint64_t seed) {
  const auto n = geometry.num_elements();
  if (weights.weights.size() != n || channel.n_elements != n ||
      channel.entries.size() != n * channel.n_subcarriers) {
    throw DimensionError("receive: weights (" + std::to_string(weights.weights.size()) +
                         ") and channel (" + std::to_string(channel.n_elements) +
                         ") must both have N=" + std::to_string(n) + " elements");
  }
  if (std::abs(std::abs(pilot) - 1.0) > kUnitTolerance) {
    throw DomainError("receive: pilot must have unit power");
  }
  if (noise_power < 0.0) {
    throw DomainError("receive: negative noise power");
  }
  const auto l_count = channel.n_subcarriers;
  ReceivedSignal y{geometry.n_rf, l_count, std::vector<cplx>(geometry.n_rf * l_count)};

  Rng rng(seed);
  for (std::size_t i = 0; i < geometry.n_rf; ++i) {
    for (std::size_t j = 0; j < geometry.n_e; ++j) {
      const auto k = geometry.index(i, j);
      const cplx wh = std::conj(weights.weights[k]);
      for (std::size_t l = 0; l < l_count; ++l) {
        cplx sample = channel.at(k, l) * pilot;
        if (noise_power > 0.0) {
          sample += complex_normal(rng, noise_power);
        }
        y.samples[i * l_count + l] += wh * sample;
      }
    }
  }
  return y;
}

ChannelEstimate estimate_channel(const DmaGeometry& geometry, const ChannelTensor& channel,
                                 cplx pilot, double noise_power, double probe_phase,
                                 std::uint64_t seed) {
  if (probe_phase == kOffPhase) {
    throw DomainError("estimate_channel: probe phase -pi/2 gives a zero element response");
  }
  if (!in_phase_range(probe_phase)) {
    throw DomainError("estimate_channel: probe phase outside (-pi/2, pi/2]");
  }
  const auto n = geometry.num_elements();
  const auto l_count = channel.n_subcarriers;
  ChannelEstimate est;
  est.n_elements = n;
  est.n_subcarriers = l_count;
  est.real_part.assign(n * l_count, 0.0);
  est.imag_part.assign(n * l_count, 0.0);
  est.noise_power = noise_power;

  std::vector<double> phases(n);
  for (std::size_t round = 0; round < geometry.n_e; ++round) {
    for (std::size_t i = 0; i < geometry.n_rf; ++i) {
      for (std::size_t j = 0; j < geometry.n_e; ++j) {
        phases[geometry.index(i, j)] = j == round ? probe_phase : kOffPhase;
      }
    }
    const auto w = build_weights(geometry, PhaseShifts(phases));
    const auto y = receive(geometry, w, channel, pilot, noise_power,
                           derive_seed(seed, "pilot-round", round));
    for (std::size_t i = 0; i < geometry.n_rf; ++i) {
      const auto k = geometry.index(i, round);
      const cplx known = std::conj(w.weights[k]) * pilot;
      for (std::size_t l = 0; l < l_count; ++l) {
        const cplx h = y.at(i, l) / known;
        est.real_part[k * l_count + l] = h.real();
        est.imag_part[k * l_count + l] = h.imag();
      }
    }
  }
  return est;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

void write_header(std::ostream& os, std::size_t n, std::size_t l) {
  os.write(kMagic, 4);
  io::write_u16(os, kChannelRecordVersion);
  io::write_u32(os, static_cast<std::uint32_t>(n));
  io::write_u32(os, static_cast<std::uint32_t>(l));
}

std::pair<std::size_t, std::size_t> read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw FormatError("channel record: bad magic");
  }
  const auto version = io::read_u16(is);
  if (version != kChannelRecordVersion) {
    throw FormatError("channel record: unsupported version " + std::to_string(version));
  }
  const std::size_t n = io::read_u32(is);
  const std::size_t l = io::read_u32(is);
  return {n, l};
}

}  // namespace

void write_channel_record(std::ostream& os, const ChannelTensor& channel) {
  write_header(os, channel.n_elements, channel.n_subcarriers);
  for (const auto& h : channel.entries) {
    io::write_f64(os, h.real());
    io::write_f64(os, h.imag());
  }
}

void write_channel_record(std::ostream& os, const ChannelEstimate& estimate) {
  write_header(os, estimate.n_elements, estimate.n_subcarriers);
  for (std::size_t k = 0; k < estimate.real_part.size(); ++k) {
    io::write_f64(os, estimate.real_part[k]);
    io::write_f64(os, estimate.imag_part[k]);
  }
}

ChannelTensor read_channel_record(std::istream& is) {
  const auto [n, l] = read_header(is);
  ChannelTensor c;
  c.n_elements = n;
  c.n_subcarriers = l;
  c.entries.resize(n * l);
  for (auto& h : c.entries) {
    const double re = io::read_f64(is);
    const double im = io::read_f64(is);
    h = {re, im};
  }
  return c;
}

ChannelEstimate read_estimate_record(std::istream& is) {
  const auto [n, l] = read_header(is);
  ChannelEstimate e;
  e.n_elements = n;
  e.n_subcarriers = l;
  e.real_part.resize(n * l);
  e.imag_part.resize(n * l);
  for (std::size_t k = 0; k < n * l; ++k) {
    e.real_part[k] = io::read_f64(is);
    e.imag_part[k] = io::read_f64(is);
  }
  return e;
}

}  // namespace dmatrack
