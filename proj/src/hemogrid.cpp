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

#include "vasosim/hemogrid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vasosim/errors.hpp"

namespace vasosim::hemo {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Neighbour lookup with either wrap-around or zero-gradient ghost cells.
struct Stencil {
  std::size_t n;
  bool periodic;

  std::size_t left(std::size_t i) const {
    if (i > 0)
      return i - 1;
    return periodic ? n - 1 : 0;
  }
  std::size_t right(std::size_t i) const {
    if (i + 1 < n)
      return i + 1;
    return periodic ? 0 : n - 1;
  }
};

void check_sizes(const FlowState &state, const Grid &grid) {
  const auto n = grid.nx();
  if (state.area.size() != n || state.velocity.size() != n ||
      state.pressure.size() != n)
    throw DomainError("flow state size does not match grid nx=" +
                      std::to_string(n));
}

// Velocity update in scaled units.
std::vector<double> momentum_update(const std::vector<double> &u,
                                    const std::vector<double> &p, double dx,
                                    double dt, double re, double alpha,
                                    const MomentumOptions &opts) {
  const std::size_t n = u.size();
  const double alpha2 = alpha * alpha;
  const double inertia = re / alpha2;

  const double diffusion_number = dt / (alpha2 * dx * dx);
  if (diffusion_number > 0.5)
    throw StabilityError("momentum diffusion number " +
                         std::to_string(diffusion_number) + " exceeds 0.5");
  if (opts.advection) {
    double umax = 0.0;
    for (double v : u)
      umax = std::max(umax, std::abs(v));
    const double courant = umax * dt * inertia / dx;
    if (courant > 1.0)
      throw StabilityError("momentum advective Courant number " +
                           std::to_string(courant) + " exceeds 1");
  }

  const Stencil s{n, opts.bc == Boundary::periodic};
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = s.left(i);
    const std::size_t r = s.right(i);

    double dpdx;
    if (s.periodic || (i > 0 && i + 1 < n))
      dpdx = (p[r] - p[l]) / (2.0 * dx);
    else if (i == 0)
      dpdx = (p[1] - p[0]) / dx;
    else
      dpdx = (p[i] - p[i - 1]) / dx;

    double adv = 0.0;
    if (opts.advection) {
      adv = u[i] > 0.0 ? u[i] * (u[i] - u[l]) / dx : u[i] * (u[r] - u[i]) / dx;
    }
    const double lap = (u[r] - 2.0 * u[i] + u[l]) / (dx * dx);

    next[i] = u[i] + dt * inertia * (-adv - dpdx + lap / re);
  }
  return next;
}

std::vector<double> continuity_update(const std::vector<double> &area,
                                      const std::vector<double> &u, double dx,
                                      double dt, Boundary bc) {
  const std::size_t n = area.size();
  double umax = 0.0;
  for (double v : u)
    umax = std::max(umax, std::abs(v));
  if (umax * dt / dx > 1.0)
    throw StabilityError("continuity Courant number " +
                         std::to_string(umax * dt / dx) + " exceeds 1");

  const bool periodic = bc == Boundary::periodic;
  // face f sits between cell f and cell f+1 (cell 0 for the periodic wrap)
  auto face_flux = [&](std::size_t a, std::size_t b) {
    const double uf = 0.5 * (u[a] + u[b]);
    return uf * (uf >= 0.0 ? area[a] : area[b]);
  };

  std::vector<double> flux(n);
  for (std::size_t f = 0; f + 1 < n; ++f)
    flux[f] = face_flux(f, f + 1);
  flux[n - 1] = periodic ? face_flux(n - 1, 0) : u[n - 1] * area[n - 1];
  const double inflow = periodic ? flux[n - 1] : u[0] * area[0];

  const double ratio = dt / dx;
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double west = i == 0 ? inflow : flux[i - 1];
    next[i] = area[i] - ratio * (flux[i] - west);
  }
  return next;
}

} // namespace

// ---------------------------------------------------------------------------
// Grid / model
// ---------------------------------------------------------------------------

Grid::Grid(std::size_t nx, std::size_t nt, double dx, double dt,
           double max_speed, double cfl_limit)
    : nx_(nx), nt_(nt), dx_(dx), dt_(dt), max_speed_(max_speed),
      cfl_limit_(cfl_limit) {
  if (nx < 2)
    throw DomainError("grid needs nx >= 2");
  if (nt < 1)
    throw DomainError("grid needs nt >= 1");
  if (!positive_finite(dx) || !positive_finite(dt))
    throw DomainError("grid spacing dx and dt must be positive");
  if (!(max_speed >= 0.0) || !std::isfinite(max_speed))
    throw DomainError("grid max_speed must be non-negative");
  if (!positive_finite(cfl_limit) || cfl_limit > 1.0)
    throw DomainError("grid cfl limit must lie in (0, 1]");
  if (courant() > cfl_limit)
    throw StabilityError("grid violates CFL: max_speed*dt/dx = " +
                         std::to_string(courant()) + " > " +
                         std::to_string(cfl_limit));
}

ArteryModel ArteryModel::with_defaults() {
  ArteryModel m;
  m.beta = beta_for_wave_speed(m.r0, m.rho, 5.0);
  return m;
}

double ArteryModel::beta_for_wave_speed(double r0, double rho, double speed) {
  // c^2 = (D/rho) dp/dD = beta sqrt(D0) / (2 rho)
  const double sqrt_d0 = std::sqrt(std::numbers::pi) * r0;
  return 2.0 * rho * speed * speed / sqrt_d0;
}

void ArteryModel::validate() const {
  auto need = [](double v, const char *name) {
    if (!positive_finite(v))
      throw DomainError(std::string("artery model: ") + name +
                        " must be positive");
  };
  need(r0, "r0");
  need(beta, "beta");
  need(rho, "rho");
  need(mu, "mu");
  need(alpha, "alpha");
  need(re, "re");
  need(c0, "c0");
  if (!std::isfinite(p_ext))
    throw DomainError("artery model: p_ext must be finite");
}

double ArteryModel::baseline_area() const { return area_from_radius(r0); }

double ArteryModel::pulse_wave_speed() const {
  return std::sqrt(beta * std::sqrt(baseline_area()) / (2.0 * rho));
}

double ArteryModel::velocity_scale() const {
  return re * kinematic_viscosity() / r0;
}

double ArteryModel::frequency_scale() const {
  return alpha * alpha * kinematic_viscosity() / (r0 * r0);
}

double ArteryModel::pressure_scale() const {
  const double u = velocity_scale();
  return rho * u * u;
}

// ---------------------------------------------------------------------------
// State containers
// ---------------------------------------------------------------------------

FlowState FlowState::from_radii(std::span<const double> radii,
                                const ArteryModel &model) {
  FlowState s;
  s.area.reserve(radii.size());
  s.pressure.reserve(radii.size());
  for (double r : radii) {
    const double a = area_from_radius(r);
    s.area.push_back(a);
    s.pressure.push_back(tube_law(a, model));
  }
  s.velocity.assign(radii.size(), 0.0);
  return s;
}

FlowState FlowState::equilibrium(std::size_t nx, const ArteryModel &model) {
  FlowState s;
  s.area.assign(nx, model.baseline_area());
  s.velocity.assign(nx, 0.0);
  s.pressure.assign(nx, model.p_ext);
  return s;
}

RadiiField::RadiiField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.nx() * grid_.nt())
    throw DomainError("radii field size " + std::to_string(values_.size()) +
                      " does not match grid " + std::to_string(grid_.nx()) +
                      "x" + std::to_string(grid_.nt()));
  for (double r : values_)
    if (!positive_finite(r))
      throw DomainError("radii field values must be positive");
}

std::span<const double> RadiiField::column(std::size_t j) const {
  if (j >= nt())
    throw DomainError("radii column " + std::to_string(j) + " out of range");
  return std::span<const double>(values_).subspan(j * nx(), nx());
}

std::vector<double> RadiiField::series(std::size_t i) const {
  if (i >= nx())
    throw DomainError("radii cell " + std::to_string(i) + " out of range");
  std::vector<double> out(nt());
  for (std::size_t j = 0; j < nt(); ++j)
    out[j] = at(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise relations
// ---------------------------------------------------------------------------

double area_from_radius(double r) {
  if (!positive_finite(r))
    throw DomainError("radius must be positive");
  return std::numbers::pi * r * r;
}

double radius_from_area(double area) {
  if (!positive_finite(area))
    throw DomainError("area must be positive");
  return std::sqrt(area / std::numbers::pi);
}

double tube_law(double area, const ArteryModel &model) {
  if (!positive_finite(area))
    throw DomainError("area must be positive");
  return model.p_ext +
         model.beta * (std::sqrt(area) - std::sqrt(model.baseline_area()));
}

double area_from_pressure(double pressure, const ArteryModel &model) {
  if (pressure == model.p_ext)
    return model.baseline_area();
  const double root =
      std::sqrt(model.baseline_area()) + (pressure - model.p_ext) / model.beta;
  if (!positive_finite(root))
    throw DomainError("pressure " + std::to_string(pressure) +
                      " Pa collapses the vessel");
  return root * root;
}

double total_volume(const FlowState &state, const Grid &grid) {
  double v = 0.0;
  for (double a : state.area)
    v += a;
  return v * grid.dx();
}

// ---------------------------------------------------------------------------
// Steppers
// ---------------------------------------------------------------------------

FlowState step_continuity(const FlowState &state, const Grid &grid,
                          Boundary bc) {
  check_sizes(state, grid);
  FlowState next = state;
  next.area = continuity_update(state.area, state.velocity, grid.dx(),
                                grid.dt(), bc);
  next.time_index = state.time_index + 1;
  return next;
}

FlowState step_momentum(const FlowState &state, const Grid &grid,
                        const ArteryModel &model, MomentumOptions opts) {
  check_sizes(state, grid);
  FlowState next = state;
  next.velocity = momentum_update(state.velocity, state.pressure, grid.dx(),
                                  grid.dt(), model.re, model.alpha, opts);
  next.time_index = state.time_index + 1;
  return next;
}

FlowSolution solve_flow(const ArteryModel &model, const Grid &grid,
                        const FlowForcing &forcing,
                        const std::optional<FlowState> &initial) {
  model.validate();
  const std::size_t nx = grid.nx();
  const std::size_t nt = grid.nt();
  const bool inlet = forcing.bc == Boundary::inlet_pressure;
  if (inlet && !forcing.inlet.empty() && forcing.inlet.size() < nt)
    throw DomainError("inlet waveform has " +
                      std::to_string(forcing.inlet.size()) +
                      " samples, grid needs " + std::to_string(nt));

  FlowState state = initial ? *initial : FlowState::equilibrium(nx, model);
  check_sizes(state, grid);
  state.time_index = 0;
  for (double a : state.area)
    if (!positive_finite(a))
      throw DomainError("initial area must be positive");

  auto inlet_gauge = [&](std::size_t j) {
    return forcing.inlet.empty() ? 0.0 : forcing.inlet[j];
  };

  // inlet_pressure: the inlet cell follows the prescribed pressure
  if (inlet) {
    state.area[0] = area_from_pressure(model.p_ext + inlet_gauge(0), model);
    state.pressure[0] = tube_law(state.area[0], model);
  }

  const double vel_scale = model.velocity_scale();
  const double p_scale = model.pressure_scale();
  const double dx_scaled = grid.dx() / model.length_scale();
  const double dt_scaled = grid.dt() * model.frequency_scale();
  const MomentumOptions mopts{forcing.bc, true};

  std::vector<double> radii(nx * nt);
  std::vector<FlowState> states;
  states.reserve(nt);

  auto record = [&](const FlowState &s) {
    const std::size_t j = s.time_index;
    for (std::size_t i = 0; i < nx; ++i)
      radii[j * nx + i] = radius_from_area(s.area[i]);
    states.push_back(s);
  };
  record(state);

  std::vector<double> u_scaled(nx), p_scaled(nx);
  for (std::size_t j = 1; j < nt; ++j) {
    try {
      for (std::size_t i = 0; i < nx; ++i) {
        u_scaled[i] = state.velocity[i] / vel_scale;
        p_scaled[i] = state.pressure[i] / p_scale;
      }
      const auto u_next = momentum_update(u_scaled, p_scaled, dx_scaled,
                                          dt_scaled, model.re, model.alpha,
                                          mopts);
      FlowState next;
      next.time_index = j;
      next.velocity.resize(nx);
      for (std::size_t i = 0; i < nx; ++i)
        next.velocity[i] = u_next[i] * vel_scale;

      next.area = continuity_update(state.area, next.velocity, grid.dx(),
                                    grid.dt(), forcing.bc);
      if (inlet)
        next.area[0] =
            area_from_pressure(model.p_ext + inlet_gauge(j), model);

      next.pressure.resize(nx);
      for (std::size_t i = 0; i < nx; ++i) {
        if (!positive_finite(next.area[i]) ||
            !std::isfinite(next.velocity[i]))
          throw SimulationError(j, "non-physical state at cell " +
                                       std::to_string(i));
        next.pressure[i] = tube_law(next.area[i], model);
      }
      state = std::move(next);
    } catch (const SimulationError &) {
      throw;
    } catch (const Error &e) {
      throw SimulationError(j, e.what());
    }
    record(state);
  }

  return FlowSolution{RadiiField(grid, std::move(radii)), std::move(states)};
}

std::vector<double> resample_waveform(std::span<const double> times,
                                      std::span<const double> values,
                                      double dt, std::size_t count) {
  if (times.size() != values.size() || times.empty())
    throw DomainError("waveform needs matching, non-empty time and value "
                      "columns");
  if (!std::is_sorted(times.begin(), times.end()))
    throw DomainError("waveform times must be sorted");
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) * dt;
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) {
      out[j] = values.front();
    } else if (it == times.end()) {
      out[j] = values.back();
    } else {
      const auto k = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
      out[j] = values[k - 1] + w * (values[k] - values[k - 1]);
    }
  }
  return out;
}

} // namespace vasosim::hemo
