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

#ifndef VASOSIM_TESTS_SUPPORT_HPP
#define VASOSIM_TESTS_SUPPORT_HPP

// Shared helpers and reference computations for the test programs.

#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include <random>

#include "vasosim/acoustics.hpp"
#include "vasosim/hemogrid.hpp"
#include "vasosim/inversion.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag = "t") {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("vasosim-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++) + "-" + std::to_string(stamp));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const fs::path &path() const noexcept { return path_; }
  fs::path operator/(const std::string &name) const { return path_ / name; }

private:
  fs::path path_;
};

/// Band-limited delay of a real sequence by `delay` samples (circular), done
/// as a linear phase ramp on its DFT.
inline std::vector<double> fractional_shift(std::span<const double> x,
                                            double delay) {
  const std::size_t n = x.size();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t m = 0; m < n; ++m)
    twiddle[m] = std::polar(1.0, -two_pi * static_cast<double>(m) / static_cast<double>(n));

  std::vector<std::complex<double>> spec(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc += x[j] * twiddle[(k * j) % n];
    // signed frequency; the Nyquist bin keeps only its real part
    const double kk = k <= n / 2 ? static_cast<double>(k)
                                 : static_cast<double>(k) - static_cast<double>(n);
    if (2 * k == n)
      spec[k] = acc.real() * std::cos(two_pi * kk * delay / static_cast<double>(n));
    else
      spec[k] = acc * std::polar(1.0, -two_pi * kk * delay / static_cast<double>(n));
  }
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += spec[k] * std::conj(twiddle[(k * j) % n]);
    y[j] = acc.real() / static_cast<double>(n);
  }
  return y;
}

/// Periodic Gaussian (three images) on [0, length).
inline double periodic_gaussian(double x, double centre, double sigma,
                                double length) {
  double v = 0.0;
  for (int m = -1; m <= 1; ++m) {
    const double z = (x - centre + m * length) / sigma;
    v += std::exp(-0.5 * z * z);
  }
  return v;
}

/// Transports a Gaussian bump on a unit background over half of a periodic
/// domain with constant velocity and returns ||bump - exact|| / ||exact||.
inline double advection_error(std::size_t nx, double courant = 0.5,
                              double sigma_fraction = 0.15) {
  using namespace vasosim::hemo;
  const double length = 1.0;
  const double dx = length / static_cast<double>(nx);
  const double c = 1.0;
  const double dt = courant * dx / c;
  const auto steps = static_cast<std::size_t>(std::lround(0.5 * length / (c * dt)));
  const Grid grid(nx, steps + 1, dx, dt, c, courant);
  const double sigma = sigma_fraction * length;

  FlowState s;
  s.area.resize(nx);
  s.velocity.assign(nx, c);
  s.pressure.assign(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    s.area[i] = 1.0 + periodic_gaussian((i + 0.5) * dx, 0.25, sigma, length);
  for (std::size_t n = 0; n < steps; ++n)
    s = step_continuity(s, grid, Boundary::periodic);

  const double shift = c * dt * static_cast<double>(steps);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double exact = periodic_gaussian((i + 0.5) * dx, 0.25 + shift, sigma, length);
    num += (s.area[i] - 1.0 - exact) * (s.area[i] - 1.0 - exact);
    den += exact * exact;
  }
  return std::sqrt(num / den);
}

/// Smallest index of the maximum, 1-based, by plain scan.
inline int brute_argmax(std::span<const double> p) {
  int best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  return best + 1;
}

inline double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double l2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a)
    s += v * v;
  return std::sqrt(s);
}

/// Radii column with a flat dip of `depth` r0 over `cells` cells centred in
/// the segment.
inline std::vector<double> dip_profile(std::size_t nx, double r0, double depth,
                                       std::size_t cells) {
  std::vector<double> r(nx, r0);
  const std::size_t first = nx / 2 - cells / 2;
  for (std::size_t i = first; i < first + cells; ++i)
    r[i] = (1.0 - depth) * r0;
  return r;
}

/// Adds white Gaussian noise with RMS `level` times the RMS of x.
inline std::vector<double> with_noise(std::vector<double> x, double level,
                                      std::uint64_t seed) {
  double ss = 0.0;
  for (double v : x)
    ss += v * v;
  const double sigma = level * std::sqrt(ss / static_cast<double>(x.size()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double &v : x)
    v += n(rng);
  return x;
}

/// Inverse problem observing the noiseless (or noisy) echo of `truth`.
inline vasosim::inversion::InverseProblem
echo_problem(const std::vector<double> &truth, double lambda,
             double noise = 0.0, std::uint64_t seed = 1) {
  using namespace vasosim;
  const hemo::ArteryModel model = hemo::ArteryModel::with_defaults();
  const hemo::Grid grid(truth.size(), 2, 1e-3, 1e-4, 10.0);
  const auto pulse = acoustics::PulseSpec::from_angle(
      2.0 * std::numbers::pi * 5e6, 1540.0, 1.0, 0.0);
  acoustics::EchoOptions opts;
  opts.duration = acoustics::round_trip_duration(grid, pulse.c());
  auto echo = acoustics::synthesize_echo(truth, pulse, grid, model, opts);
  if (noise > 0.0)
    echo = acoustics::EchoTrace(with_noise(echo.samples(), noise, seed), echo.fs(),
                                echo.t0());
  return inversion::InverseProblem::make(echo, pulse, grid, model, lambda);
}

} // namespace testsupport

#endif // VASOSIM_TESTS_SUPPORT_HPP
