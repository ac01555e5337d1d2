/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The vasosim Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VASOSIM_ACOUSTICS_HPP
#define VASOSIM_ACOUSTICS_HPP

/**
 * @file acoustics.hpp
 * @brief Harmonic pressure waves, echo synthesis and time-of-flight.
 *
 * Echoes follow a single-scattering model: the segment is preceded by a
 * reference section of radius r0, every cell boundary at x_i = i dx reflects
 * a copy of the Hann-windowed incident pulse with amplitude
 *
 *     a_i = Gamma_i * prod_{m<i} (1 - Gamma_m^2)
 *
 * delayed by the round trip 2 x_i / c. Multiple reflections are ignored.
 */

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vasosim/hemogrid.hpp"

namespace vasosim::acoustics {

/// Single-frequency plane-wave pair.
///
/// The constructor enforces omega^2 = c^2 (k_x^2 + k_r^2) to 1e-10 relative,
/// so the forward and reflected terms both solve the wave equation.
class PulseSpec {
public:
  PulseSpec(double omega, double amp_forward, double amp_reflected, double k_x,
            double k_r, double c);

  /// Wave numbers from a propagation angle measured from the x axis.
  static PulseSpec from_angle(double omega, double c, double amp_forward,
                              double amp_reflected, double angle = 0.0);

  /// Skips the dispersion check. Only for exercising residual diagnostics.
  static PulseSpec unchecked(double omega, double amp_forward,
                             double amp_reflected, double k_x, double k_r,
                             double c);

  double omega() const noexcept { return omega_; }
  double amp_forward() const noexcept { return amp_forward_; }
  double amp_reflected() const noexcept { return amp_reflected_; }
  double k_x() const noexcept { return k_x_; }
  double k_r() const noexcept { return k_r_; }
  double c() const noexcept { return c_; }

  double frequency() const;  ///< Hz
  double wavelength() const; ///< 2 pi / |k|
  double period() const;     ///< 2 pi / omega

  /// Same frequency and direction in a medium with sound speed c.
  PulseSpec with_speed(double c) const;

  bool operator==(const PulseSpec &) const = default;

private:
  struct Unchecked {};
  PulseSpec(Unchecked, double omega, double amp_forward, double amp_reflected,
            double k_x, double k_r, double c);

  double omega_;
  double amp_forward_;
  double amp_reflected_;
  double k_x_;
  double k_r_;
  double c_;
};

/// Sampled pressure time series. Immutable after construction.
class EchoTrace {
public:
  EchoTrace(std::vector<double> samples, double fs, double t0,
            std::string session_id = {});

  const std::vector<double> &samples() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  double t0() const noexcept { return t0_; }
  const std::string &session_id() const noexcept { return session_id_; }
  std::size_t size() const noexcept { return samples_.size(); }

  double time(std::size_t n) const {
    return t0_ + static_cast<double>(n) / fs_;
  }

  /// Copy with a different session label.
  EchoTrace relabel(std::string session_id) const;

  bool operator==(const EchoTrace &) const = default;

private:
  std::vector<double> samples_;
  double fs_;
  double t0_;
  std::string session_id_;
};

struct ToFMeasurement {
  double tof = 0.0;              ///< s
  double peak_correlation = 0.0; ///< normalised, in [-1, 1]
  std::string session_id;
};

struct DensityEstimate {
  double ratio = 1.0; ///< rho_new / rho_ref
  double fractional_change = 0.0;
  bool bulk_modulus_fixed = true;
  bool path_fixed = true;
};

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

/// A e^{i(wt - kx x - kr r)} + B e^{i(wt - kx x + kr r)}.
std::complex<double> wave_field(const PulseSpec &pulse, double x, double r,
                                double t);

struct SampleRange {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;

  std::size_t count() const;
};

struct SampleBox {
  SampleRange x;
  SampleRange r;
  SampleRange t;

  /// Box of `points` samples per axis starting at the origin, spaced at
  /// wavelength/per_wavelength in space and period/per_wavelength in time.
  static SampleBox around_origin(const PulseSpec &pulse, double per_wavelength,
                                 std::size_t points = 7);
};

/// max |lap P - P_tt / c^2| / (max|P| (k_x^2 + k_r^2)) over interior points of
/// the box, using central second differences. Zero for an identically zero
/// field. Throws DomainError when an axis has fewer than three samples.
double wave_equation_residual(const PulseSpec &pulse, const SampleBox &box);

// ---------------------------------------------------------------------------
// Echo synthesis
// ---------------------------------------------------------------------------

/// Pressure amplitude reflection coefficient for a step from D_left to
/// D_right, with characteristic impedance Z = rho c / D.
double reflection_coefficient(double area_left, double area_right,
                              const hemo::ArteryModel &model);

struct EchoOptions {
  double fs = 50e6;      ///< sample rate [Hz]
  double duration = 0.0; ///< listening time after emission [s]
  double n_cycles = 5.0; ///< cycles under the Hann window
};

/// Hann-windowed real harmonic centred on t = 0, peak amplitude A.
double windowed_pulse(const PulseSpec &pulse, double n_cycles, double t);

/// Sample-accurate forward model for a fixed pulse, grid and sampling.
///
/// The arrival shapes are computed once, so repeated evaluation for
/// different radii costs O(nx * pulse length).
class EchoModel {
public:
  EchoModel(const PulseSpec &pulse, const hemo::Grid &grid,
            const hemo::ArteryModel &model, const EchoOptions &opts);

  std::size_t trace_size() const noexcept { return size_; }
  double t0() const noexcept { return t0_; }
  double fs() const noexcept { return opts_.fs; }
  std::size_t nx() const noexcept { return arrivals_.size(); }

  /// Arrival amplitudes a_i for a radii column.
  std::vector<double> amplitudes(std::span<const double> radii) const;

  /// Writes the noiseless echo of `radii` into `out` (resized).
  void render(std::span<const double> radii, std::vector<double> &out) const;

  EchoTrace synthesize(std::span<const double> radii,
                       std::string session_id = {}) const;

  /// The incident pulse itself on the same time axis.
  EchoTrace incident(std::string session_id = {}) const;

  /// Arrival time of the boundary in front of cell i.
  double arrival_time(std::size_t i) const;

private:
  struct Arrival {
    std::size_t first = 0;
    std::vector<double> shape;
  };

  PulseSpec pulse_;
  hemo::ArteryModel model_;
  EchoOptions opts_;
  double dx_;
  double t0_;
  long long n0_;
  std::size_t size_;
  std::vector<Arrival> arrivals_;
  Arrival incident_;
};

/// Checks sampling and duration. Throws ConfigurationError.
void validate_echo_options(const PulseSpec &pulse, const hemo::Grid &grid,
                           const EchoOptions &opts);

/// Default listening time: the round trip over the whole segment.
double round_trip_duration(const hemo::Grid &grid, double c);

EchoTrace synthesize_echo(std::span<const double> radii,
                          const PulseSpec &pulse, const hemo::Grid &grid,
                          const hemo::ArteryModel &model,
                          const EchoOptions &opts);

/// Echo of a single reflector at `path_length` (one way), used for ranging.
EchoTrace ranging_echo(const PulseSpec &pulse, double path_length,
                       double reflectivity, const EchoOptions &opts,
                       std::string session_id = {});

/// Incident pulse sampled on the time axis used by ranging_echo.
EchoTrace ranging_incident(const PulseSpec &pulse, double path_length,
                           const EchoOptions &opts,
                           std::string session_id = {});

// ---------------------------------------------------------------------------
// Time of flight and density
// ---------------------------------------------------------------------------

struct TofOptions {
  double min_peak = 0.2; ///< reject weaker correlation peaks
};

/// Delay of `echo` relative to `incident` from the peak of their normalised
/// cross-correlation, refined by a three-point parabola.
ToFMeasurement estimate_tof(const EchoTrace &incident, const EchoTrace &echo,
                            const TofOptions &opts = {});

/// rho_new / rho_ref = (tof_new / tof_ref)^2 for fixed bulk modulus and path.
DensityEstimate density_change(const ToFMeasurement &tof_ref,
                               const ToFMeasurement &tof_new,
                               bool bulk_modulus_fixed = true);

} // namespace vasosim::acoustics

#endif // VASOSIM_ACOUSTICS_HPP
