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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "support.hpp"
#include "vasosim/errors.hpp"
#include "vasosim/hemogrid.hpp"

using namespace vasosim;
using namespace vasosim::hemo;
using std::numbers::pi;

TEST_CASE("area and radius conversions") {
  CHECK(area_from_radius(1.0) == doctest::Approx(3.14159265).epsilon(1e-9));
  CHECK(area_from_radius(2.0) == doctest::Approx(4.0 * pi).epsilon(1e-15));
  CHECK(area_from_radius(1e-3) == doctest::Approx(pi * 1e-6).epsilon(1e-15));
  CHECK(radius_from_area(pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(radius_from_area(4.0 * pi) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(area_from_radius(0.0), DomainError);
  CHECK_THROWS_AS(area_from_radius(-1.0), DomainError);
  CHECK_THROWS_AS(radius_from_area(0.0), DomainError);
  CHECK_THROWS_AS(radius_from_area(-2.0), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1e-4, 1e-2);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double r = dist(rng);
    worst = std::max(worst, std::abs(radius_from_area(area_from_radius(r)) - r) / r);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("tube law") {
  ArteryModel m = ArteryModel::with_defaults();
  const double d0 = pi * m.r0 * m.r0;
  CHECK(tube_law(d0, m) == doctest::Approx(m.p_ext));

  m.beta = 2.0;
  m.p_ext = 0.0;
  const double s = std::sqrt(d0) + 0.5;
  CHECK(tube_law(s * s, m) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(tube_law(1.1 * d0, m) > tube_law(d0, m));
  CHECK(tube_law(d0, m) > tube_law(0.9 * d0, m));
  CHECK_THROWS_AS(tube_law(0.0, m), DomainError);

  // inverse
  const double p = tube_law(1.3 * d0, m);
  CHECK(area_from_pressure(p, m) == doctest::Approx(1.3 * d0).epsilon(1e-12));
}

TEST_CASE("default model gives the requested pulse-wave speed") {
  const ArteryModel m = ArteryModel::with_defaults();
  CHECK(m.r0 == 2e-3);
  CHECK(m.rho == 1060.0);
  CHECK(m.pulse_wave_speed() == doctest::Approx(5.0).epsilon(1e-12));
  ArteryModel bad = m;
  bad.mu = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("grid invariants") {
  CHECK_NOTHROW(Grid(64, 10, 1e-3, 1e-4, 10.0));
  CHECK_THROWS_AS(Grid(1, 10, 1e-3, 1e-4, 10.0), DomainError);
  CHECK_THROWS_AS(Grid(4, 0, 1e-3, 1e-4, 10.0), DomainError);
  CHECK_THROWS_AS(Grid(4, 10, 0.0, 1e-4, 10.0), DomainError);
  CHECK_THROWS_AS(Grid(4, 10, 1e-3, -1e-4, 10.0), DomainError);
  CHECK_THROWS_AS(Grid(4, 10, 1e-3, 1e-4, 10.0, 1.5), DomainError);
  // 20 * 1e-4 / 1e-3 = 2
  CHECK_THROWS_AS(Grid(4, 10, 1e-3, 1e-4, 20.0), StabilityError);
  CHECK_THROWS_AS(Grid(4, 10, 1e-3, 1e-4, 10.0, 0.5), StabilityError);
}

TEST_CASE("flow state from radii keeps D = pi r^2") {
  const ArteryModel m = ArteryModel::with_defaults();
  std::vector<double> r{1e-3, 2e-3, 2.5e-3};
  const FlowState s = FlowState::from_radii(r, m);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(std::abs(s.area[i] - pi * r[i] * r[i]) / (pi * r[i] * r[i]) < 1e-12);
    CHECK(s.velocity[i] == 0.0);
    CHECK(s.pressure[i] == doctest::Approx(tube_law(s.area[i], m)));
  }
}

TEST_CASE("continuity: trivial states are fixed points") {
  const Grid g(32, 2, 1e-3, 1e-4, 10.0);
  FlowState s;
  s.area.assign(32, 3.0e-6);
  s.velocity.assign(32, 4.0);
  s.pressure.assign(32, 0.0);
  CHECK(step_continuity(s, g).area == s.area);

  for (std::size_t i = 0; i < 32; ++i)
    s.area[i] = 3e-6 * (1.0 + 0.1 * std::sin(2.0 * pi * i / 32.0));
  s.velocity.assign(32, 0.0);
  CHECK(step_continuity(s, g).area == s.area);
}

TEST_CASE("continuity: runtime Courant violation") {
  const Grid g(8, 2, 1e-3, 1e-4, 10.0);
  FlowState s;
  s.area.assign(8, 1.0);
  s.velocity.assign(8, 0.0);
  s.pressure.assign(8, 0.0);
  s.velocity[3] = 11.0;
  CHECK_THROWS_AS(step_continuity(s, g), StabilityError);
}

TEST_CASE("continuity: advection matches the shifted profile") {
  const double coarse = testsupport::advection_error(256);
  const double fine = testsupport::advection_error(512);
  MESSAGE("L2 error nx=256: " << coarse << ", nx=512: " << fine);
  CHECK(coarse < 0.02);
  CHECK(coarse / fine >= 1.8);
}

TEST_CASE("momentum: no forcing keeps u = 0") {
  ArteryModel m = ArteryModel::with_defaults();
  const Grid g(16, 2, 1.0, 0.01, 1.0);
  FlowState s;
  s.area.assign(16, 1.0);
  s.velocity.assign(16, 0.0);
  s.pressure.assign(16, 3.0);
  const FlowState n = step_momentum(s, g, m);
  for (double u : n.velocity)
    CHECK(u == 0.0);
}

TEST_CASE("momentum: single Euler step under a uniform pressure gradient") {
  ArteryModel m = ArteryModel::with_defaults();
  m.re = 100.0;
  m.alpha = std::sqrt(10.0);
  const std::size_t nx = 9;
  const Grid g(nx, 2, 1.0, 0.01, 1.0);
  FlowState s;
  s.area.assign(nx, 1.0);
  s.velocity.assign(nx, 0.0);
  s.pressure.resize(nx);
  for (std::size_t i = 0; i < nx; ++i)
    s.pressure[i] = 0.1 * static_cast<double>(i);
  const FlowState n = step_momentum(s, g, m, {Boundary::inlet_pressure, true});
  // u = -dt (Re/alpha^2) dp/dx = -0.01 * 10 * 0.1
  for (std::size_t i = 1; i + 1 < nx; ++i)
    CHECK(std::abs(n.velocity[i] - (-0.01)) < 1e-14);
}

TEST_CASE("momentum: diffusion of one Fourier mode") {
  ArteryModel m = ArteryModel::with_defaults();
  m.re = 100.0;
  m.alpha = std::sqrt(10.0);
  const std::size_t nx = 256;
  const double dx = 1.0, dt = 1.0;
  const Grid g(nx, 2, dx, dt, 1.0);
  const double k = 2.0 * pi / (static_cast<double>(nx) * dx);

  FlowState s;
  s.area.assign(nx, 1.0);
  s.pressure.assign(nx, 0.0);
  s.velocity.resize(nx);
  for (std::size_t i = 0; i < nx; ++i)
    s.velocity[i] = std::sin(k * static_cast<double>(i) * dx);

  auto amplitude = [&](const std::vector<double> &u) {
    double a = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
      a += u[i] * std::sin(k * static_cast<double>(i) * dx);
    return 2.0 * a / static_cast<double>(nx);
  };
  const double a0 = amplitude(s.velocity);
  const int steps = 1000;
  for (int n = 0; n < steps; ++n)
    s = step_momentum(s, g, m, {Boundary::periodic, false});
  const double rate = -std::log(amplitude(s.velocity) / a0) / (steps * dt);
  const double expected = k * k / (m.alpha * m.alpha);
  MESSAGE("decay rate " << rate << " expected " << expected);
  CHECK(std::abs(rate - expected) / expected < 0.01);
}

TEST_CASE("momentum: diffusion stability limit") {
  ArteryModel m = ArteryModel::with_defaults();
  m.alpha = 1.0;
  const Grid g(8, 2, 1.0, 1.0, 1.0);
  FlowState s;
  s.area.assign(8, 1.0);
  s.velocity.assign(8, 0.0);
  s.pressure.assign(8, 0.0);
  // dt / (alpha^2 dx^2) = 1 > 1/2
  CHECK_THROWS_AS(step_momentum(s, g, m), StabilityError);
}

TEST_CASE("solve_flow: zero forcing stays at equilibrium") {
  const ArteryModel m = ArteryModel::with_defaults();
  const Grid g(64, 500, 1e-3, 1e-4, 10.0);
  const FlowSolution sol = solve_flow(m, g, {Boundary::inlet_pressure, {}});
  for (double r : sol.radii.values())
    CHECK(std::abs(r - m.r0) / m.r0 < 1e-12);
  for (const auto &st : sol.states)
    for (std::size_t i = 0; i < st.size(); ++i)
      CHECK(std::abs(st.velocity[i]) < 1e-12);
}

namespace {

FlowSolution sine_run(std::size_t nt, double freq) {
  const ArteryModel m = ArteryModel::with_defaults();
  const Grid g(64, nt, 1e-3, 1e-4, 10.0);
  std::vector<double> inlet(nt);
  for (std::size_t j = 0; j < nt; ++j)
    inlet[j] = 100.0 * std::sin(2.0 * pi * freq * static_cast<double>(j) * g.dt());
  return solve_flow(m, g, {Boundary::inlet_pressure, inlet});
}

} // namespace

TEST_CASE("solve_flow: radii oscillate at the inlet frequency") {
  const std::size_t nt = 4000; // 0.4 s
  const FlowSolution sol = sine_run(nt, 10.0);
  std::vector<double> x = sol.radii.series(32);
  double mean = 0.0;
  for (double v : x)
    mean += v;
  mean /= static_cast<double>(nt);
  std::size_t best = 0;
  double best_power = -1.0;
  for (std::size_t k = 1; k < 200; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < nt; ++j)
      acc += (x[j] - mean) * std::polar(1.0, -2.0 * pi * static_cast<double>(k * j) /
                                                 static_cast<double>(nt));
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best = k;
    }
  }
  // 10 Hz over 0.4 s
  CHECK(best == 4);
  const ArteryModel m = ArteryModel::with_defaults();
  CHECK(*std::min_element(x.begin(), x.end()) < m.r0);
  CHECK(*std::max_element(x.begin(), x.end()) > m.r0);
}

TEST_CASE("solve_flow: emitted radii and areas agree") {
  const FlowSolution sol = sine_run(300, 10.0);
  for (const auto &st : sol.states)
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double r = sol.radii.at(i, st.time_index);
      CHECK(std::abs(st.area[i] - pi * r * r) / st.area[i] < 1e-12);
    }
}

TEST_CASE("solve_flow: deterministic") {
  CHECK(sine_run(400, 10.0).radii == sine_run(400, 10.0).radii);
}

TEST_CASE("solve_flow: periodic boundaries conserve volume") {
  const ArteryModel m = ArteryModel::with_defaults();
  const std::size_t nx = 256;
  const Grid g(nx, 1001, 1e-3, 1e-4, 10.0);
  std::vector<double> r(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double z = (static_cast<double>(i) - 100.0) / 12.0;
    r[i] = m.r0 * (1.0 + 0.1 * std::exp(-0.5 * z * z));
  }
  const FlowSolution sol =
      solve_flow(m, g, {Boundary::periodic, {}}, FlowState::from_radii(r, m));
  const double v0 = total_volume(sol.states.front(), g);
  double worst = 0.0;
  for (const auto &st : sol.states)
    worst = std::max(worst, std::abs(total_volume(st, g) - v0) / v0);
  MESSAGE("max relative drift " << worst);
  CHECK(worst < 1e-8);
  // something actually moved
  CHECK(sol.states.back().area != sol.states.front().area);
}

TEST_CASE("solve_flow: inlet waveform shorter than the grid") {
  const ArteryModel m = ArteryModel::with_defaults();
  const Grid g(16, 100, 1e-3, 1e-4, 10.0);
  CHECK_THROWS_AS(solve_flow(m, g, {Boundary::inlet_pressure, std::vector<double>(10, 1.0)}),
                  DomainError);
}

TEST_CASE("solve_flow: collapse is reported with its step") {
  const ArteryModel m = ArteryModel::with_defaults();
  const Grid g(16, 200, 1e-3, 1e-4, 10.0);
  // huge suction at the inlet cannot be represented by a positive area
  std::vector<double> inlet(200, 0.0);
  for (std::size_t j = 5; j < 200; ++j)
    inlet[j] = -1e9;
  CHECK_THROWS_AS(solve_flow(m, g, {Boundary::inlet_pressure, inlet}), Error);
}

TEST_CASE("waveform resampling") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<double> p{0.0, 10.0, 0.0};
  const auto s = resample_waveform(t, p, 0.5, 6);
  const std::vector<double> expect{0.0, 5.0, 10.0, 5.0, 0.0, 0.0};
  CHECK(s == expect);
}
