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

#ifndef DMATRACK_DMA_HPP
#define DMATRACK_DMA_HPP

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

/**
 * \file
 * \brief Dynamic metasurface antenna receiver: element response, RFC-grouped
 * reception and pilot-sparse channel estimation.
 *
 * Elements are indexed row-major, n = i * n_e + j (zero-based), where row i is
 * a microstrip feeding RF chain i and column j is the position along it.
 */

namespace dmatrack {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
/// Phase that switches an element off (its response is exactly zero).
inline constexpr double kOffPhase = -std::numbers::pi / 2.0;
/// Phase of maximum response magnitude, used for pilot probing.
inline constexpr double kFullPhase = std::numbers::pi / 2.0;

/// Physical layout of the metasurface.
struct DmaGeometry {
  std::size_t n_rf = 1;                 ///< RF chains (rows)
  std::size_t n_e = 1;                  ///< elements per microstrip (columns)
  double wavelength = 1.0;              ///< carrier wavelength [m]
  double permittivity = 6.0;            ///< microstrip relative permittivity
  std::vector<double> element_offsets;  ///< per-column position along the microstrip [m]
  double p_max = 1.0;                   ///< bound on the squared weight norm

  /// Half-wavelength columns and p_max = N (every element may run at full power).
  static DmaGeometry uniform(std::size_t n_rf, std::size_t n_e, double wavelength,
                             double permittivity = 6.0);

  [[nodiscard]] std::size_t num_elements() const noexcept { return n_rf * n_e; }
  [[nodiscard]] std::size_t index(std::size_t row, std::size_t col) const noexcept {
    return row * n_e + col;
  }
  /// Throws DomainError when an invariant is broken.
  void validate() const;
};

/// Per-element controllable phases, each in [-pi/2, pi/2].
class PhaseShifts {
 public:
  explicit PhaseShifts(std::vector<double> phases);
  static PhaseShifts constant(std::size_t n, double phase);

  [[nodiscard]] std::span<const double> values() const noexcept { return phases_; }
  [[nodiscard]] std::size_t size() const noexcept { return phases_.size(); }

 private:
  std::vector<double> phases_;
};

/// Complex configuration vector w, one entry per element.
struct DmaWeights {
  std::vector<cplx> weights;
  [[nodiscard]] double squared_norm() const noexcept;
};

/// Frequency response per element (major) and subcarrier (minor).
struct ChannelTensor {
  std::size_t n_elements = 0;
  std::size_t n_subcarriers = 0;
  std::vector<cplx> entries;
  std::vector<double> subcarrier_freqs;

  ChannelTensor() = default;
  ChannelTensor(std::size_t n, std::size_t l, std::vector<double> freqs);

  [[nodiscard]] cplx& at(std::size_t n, std::size_t l) { return entries[n * n_subcarriers + l]; }
  [[nodiscard]] const cplx& at(std::size_t n, std::size_t l) const {
    return entries[n * n_subcarriers + l];
  }
  void validate() const;
};

/// Real-valued 2 x N x L stack of an estimated channel.
struct ChannelEstimate {
  std::size_t n_elements = 0;
  std::size_t n_subcarriers = 0;
  std::vector<double> real_part;  ///< N x L, element-major
  std::vector<double> imag_part;  ///< N x L, element-major
  double noise_power = 0.0;

  static ChannelEstimate from_channel(const ChannelTensor& channel, double noise_power = 0.0);

  [[nodiscard]] cplx at(std::size_t n, std::size_t l) const {
    const auto k = n * n_subcarriers + l;
    return {real_part[k], imag_part[k]};
  }
  void validate() const;
};

/// Received samples per RF chain (major) and subcarrier (minor).
struct ReceivedSignal {
  std::size_t n_rf = 0;
  std::size_t n_subcarriers = 0;
  std::vector<cplx> samples;

  [[nodiscard]] const cplx& at(std::size_t i, std::size_t l) const {
    return samples[i * n_subcarriers + l];
  }
};

/// Internal microstrip wavenumber (2 pi / lambda) sqrt(eps).
double wavenumber(double wavelength, double permittivity);

/// Lorentzian-constrained element response 0.5 (j + e^{j phase}) e^{j rho beta}.
cplx element_response(double phase, double rho, double beta);

DmaWeights build_weights(const DmaGeometry& geometry, const PhaseShifts& phases);

/// Uplink reception: per RF chain i and subcarrier l,
/// y_i = w_i^H (h_i x + n_i), noise per element ~ CN(0, noise_power).
ReceivedSignal receive(const DmaGeometry& geometry, const DmaWeights& weights,
                       const ChannelTensor& channel, cplx pilot, double noise_power,
                       std::uint64_t seed);

/// Estimates the full channel from n_e pilot rounds. In round j every row keeps
/// only column j active (at `probe_phase`) and the known w^H x is divided out.
/// The channel is assumed static across the rounds.
ChannelEstimate estimate_channel(const DmaGeometry& geometry, const ChannelTensor& channel,
                                 cplx pilot, double noise_power, double probe_phase,
                                 std::uint64_t seed);

/// Number of pilot transmissions consumed by estimate_channel.
[[nodiscard]] inline std::size_t pilot_overhead(const DmaGeometry& geometry) noexcept {
  return geometry.n_e;
}

/// Noise power in watts for a level in dBm (unit-power pilot normalization).
double dbm_to_watts(double dbm);

// Flat "DMAC" record: magic, u16 version, u32 N, u32 L, then (re, im) f64 pairs
// element-major. Both channel types share the layout.
inline constexpr std::uint16_t kChannelRecordVersion = 1;
void write_channel_record(std::ostream& os, const ChannelTensor& channel);
void write_channel_record(std::ostream& os, const ChannelEstimate& estimate);
ChannelTensor read_channel_record(std::istream& is);
ChannelEstimate read_estimate_record(std::istream& is);

}  // namespace dmatrack

#endif  // DMATRACK_DMA_HPP
