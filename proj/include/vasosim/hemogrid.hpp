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

#ifndef VASOSIM_HEMOGRID_HPP
#define VASOSIM_HEMOGRID_HPP

/**
 * @file hemogrid.hpp
 * @brief One-dimensional model of a straight, non-bifurcated artery.
 *
 * The artery is split into nx cells of length dx. Each cell carries a
 * cross-sectional area D, an axial velocity u and a transmural pressure p.
 * Area is advanced with a conservative upwind flux scheme for
 *
 *     dD/dt + d(uD)/dx = 0
 *
 * and velocity with an explicit Euler step of the axial momentum balance in
 * Womersley/Reynolds scaled form
 *
 *     (alpha^2/Re) du/dt + u du/dx + dp/dx - (1/Re) d2u/dx2 = 0.
 *
 * A linear-elastic tube law closes the system. Scaling between SI and the
 * scaled momentum variables uses the artery radius as length scale, the
 * velocity implied by Re and the angular frequency implied by alpha:
 *
 *     L = r0,  U = Re nu / r0,  omega = alpha^2 nu / r0^2,  P = rho U^2
 *
 * with nu = mu / rho. Density is constant during a run.
 */

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace vasosim::hemo {

/// Space-time discretisation of the segment.
///
/// The constructor enforces max_speed * dt / dx <= cfl_limit <= 1.
class Grid {
public:
  Grid(std::size_t nx, std::size_t nt, double dx, double dt, double max_speed,
       double cfl_limit = 1.0);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nt() const noexcept { return nt_; }
  double dx() const noexcept { return dx_; }
  double dt() const noexcept { return dt_; }
  double max_speed() const noexcept { return max_speed_; }
  double cfl_limit() const noexcept { return cfl_limit_; }

  /// Segment length nx * dx.
  double length() const noexcept { return static_cast<double>(nx_) * dx_; }
  double courant() const noexcept { return max_speed_ * dt_ / dx_; }

  bool operator==(const Grid &) const = default;

private:
  std::size_t nx_;
  std::size_t nt_;
  double dx_;
  double dt_;
  double max_speed_;
  double cfl_limit_;
};

/// Material and flow parameters of the artery.
struct ArteryModel {
  double r0 = 2e-3;        ///< baseline radius [m]
  double beta = 0.0;       ///< tube-law stiffness [Pa/m]; see with_defaults()
  double p_ext = 0.0;      ///< external pressure [Pa]
  double rho = 1060.0;     ///< blood density [kg/m^3]
  double mu = 3.5e-3;      ///< dynamic viscosity [Pa s]
  double alpha = 3.0;      ///< Womersley number
  double re = 100.0;       ///< Reynolds number
  double c0 = 1540.0;      ///< reference acoustic speed [m/s]

  /// Physiological defaults with beta giving a 5 m/s pulse-wave speed.
  static ArteryModel with_defaults();

  /// Stiffness giving pulse-wave speed `speed` at the baseline area.
  static double beta_for_wave_speed(double r0, double rho, double speed);

  /// Throws DomainError unless every parameter is positive (p_ext excepted).
  void validate() const;

  double baseline_area() const;
  /// sqrt(D0 * dp/dD / rho) at the baseline area.
  double pulse_wave_speed() const;

  double kinematic_viscosity() const { return mu / rho; }
  double length_scale() const { return r0; }
  double velocity_scale() const;
  double frequency_scale() const;
  double pressure_scale() const;

  bool operator==(const ArteryModel &) const = default;
};

enum class Boundary {
  periodic,       ///< wrap-around; conserves total volume
  inlet_pressure, ///< prescribed inlet pressure, zero-gradient outlet
};

/// Area, velocity and pressure at one time level.
struct FlowState {
  std::vector<double> area;     ///< D [m^2]
  std::vector<double> velocity; ///< u [m/s]
  std::vector<double> pressure; ///< p [Pa]
  std::size_t time_index = 0;

  /// Builds D = pi r^2, u = 0 and p from the tube law.
  static FlowState from_radii(std::span<const double> radii,
                              const ArteryModel &model);

  /// Baseline equilibrium D = D0, u = 0, p = p_ext.
  static FlowState equilibrium(std::size_t nx, const ArteryModel &model);

  std::size_t size() const noexcept { return area.size(); }

  bool operator==(const FlowState &) const = default;
};

/// Radius history r(i, j), i over cells, j over time levels.
class RadiiField {
public:
  RadiiField(Grid grid, std::vector<double> values);

  const Grid &grid() const noexcept { return grid_; }
  std::size_t nx() const noexcept { return grid_.nx(); }
  std::size_t nt() const noexcept { return grid_.nt(); }

  double at(std::size_t i, std::size_t j) const { return values_[j * nx() + i]; }

  /// Radii of all cells at time level j.
  std::span<const double> column(std::size_t j) const;

  /// Time series of cell i.
  std::vector<double> series(std::size_t i) const;

  const std::vector<double> &values() const noexcept { return values_; }

  bool operator==(const RadiiField &) const = default;

private:
  Grid grid_;
  std::vector<double> values_;
};

double area_from_radius(double r);
double radius_from_area(double area);

/// p = p_ext + beta (sqrt(D) - sqrt(D0)).
double tube_law(double area, const ArteryModel &model);

/// Inverse of tube_law. Throws DomainError when no positive area maps to p.
double area_from_pressure(double pressure, const ArteryModel &model);

/// sum_i D_i dx.
double total_volume(const FlowState &state, const Grid &grid);

/// One conservative upwind step of the continuity equation.
///
/// Face velocities are cell averages; the upwind cell supplies the area.
/// Non-periodic boundaries use zero-gradient ghost cells.
FlowState step_continuity(const FlowState &state, const Grid &grid,
                          Boundary bc = Boundary::periodic);

struct MomentumOptions {
  Boundary bc = Boundary::periodic;
  bool advection = true; ///< include u du/dx
};

/// One explicit Euler step of the scaled momentum equation.
///
/// The state and grid are taken as already scaled: velocity in units of U,
/// pressure in units of P, dx in units of r0 and dt in units of 1/omega.
FlowState step_momentum(const FlowState &state, const Grid &grid,
                        const ArteryModel &model, MomentumOptions opts = {});

struct FlowForcing {
  Boundary bc = Boundary::inlet_pressure;
  /// Inlet gauge pressure (above p_ext) at t = j dt, j = 0..nt-1. Ignored
  /// for periodic boundaries; may be empty for zero forcing.
  std::vector<double> inlet;
};

struct FlowSolution {
  RadiiField radii;
  std::vector<FlowState> states; ///< one per time level, states[0] initial
};

/// Runs nt-1 coupled steps starting from `initial` (baseline equilibrium
/// when absent). Column j of the radii field is the state after j steps.
FlowSolution solve_flow(const ArteryModel &model, const Grid &grid,
                        const FlowForcing &forcing,
                        const std::optional<FlowState> &initial = std::nullopt);

/// Samples a (t, p) waveform at t = j dt by linear interpolation, holding the
/// end values outside the table.
std::vector<double> resample_waveform(std::span<const double> times,
                                      std::span<const double> values,
                                      double dt, std::size_t count);

} // namespace vasosim::hemo

#endif // VASOSIM_HEMOGRID_HPP
