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

#include "vasosim/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vasosim/errors.hpp"

namespace vasosim::acoustics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Sample n sits at t = (n + n0) / fs, so t = 0 is always a sample.
struct TimeAxis {
  long long n0 = 0;
  std::size_t size = 0;
  double fs = 1.0;

  double time(long long n) const {
    return static_cast<double>(n + n0) / fs;
  }

  static TimeAxis make(double pulse_length, double duration, double fs) {
    TimeAxis ax;
    ax.fs = fs;
    ax.n0 = -static_cast<long long>(std::ceil(0.5 * pulse_length * fs));
    const auto last = static_cast<long long>(
        std::floor((duration + 0.5 * pulse_length) * fs));
    ax.size = static_cast<std::size_t>(last - ax.n0 + 1);
    return ax;
  }

  // Samples of the window [centre - half, centre + half] clipped to the axis.
  std::pair<std::size_t, std::size_t> span(double centre, double half) const {
    const auto lo = static_cast<long long>(std::ceil((centre - half) * fs)) - n0;
    const auto hi =
        static_cast<long long>(std::floor((centre + half) * fs)) - n0;
    const long long first = std::max<long long>(lo, 0);
    const long long last =
        std::min<long long>(hi, static_cast<long long>(size) - 1);
    if (last < first)
      return {0, 0};
    return {static_cast<std::size_t>(first),
            static_cast<std::size_t>(last - first + 1)};
  }
};

double pulse_length(const PulseSpec &pulse, double n_cycles) {
  return n_cycles * pulse.period();
}

void check_pulse_sampling(const PulseSpec &pulse, const EchoOptions &opts) {
  if (!positive_finite(opts.fs))
    throw ConfigurationError("sample rate must be positive");
  if (!positive_finite(opts.n_cycles))
    throw ConfigurationError("pulse needs a positive number of cycles");
  if (!(opts.fs > 4.0 * pulse.frequency()))
    throw ConfigurationError("sample rate " + std::to_string(opts.fs) +
                             " Hz must exceed 4x the pulse frequency " +
                             std::to_string(pulse.frequency()) + " Hz");
}

} // namespace

// ---------------------------------------------------------------------------
// PulseSpec / EchoTrace
// ---------------------------------------------------------------------------

PulseSpec::PulseSpec(Unchecked, double omega, double amp_forward,
                     double amp_reflected, double k_x, double k_r, double c)
    : omega_(omega), amp_forward_(amp_forward), amp_reflected_(amp_reflected),
      k_x_(k_x), k_r_(k_r), c_(c) {
  if (!positive_finite(omega))
    throw DomainError("pulse omega must be positive");
  if (!positive_finite(c))
    throw DomainError("pulse sound speed must be positive");
  if (!(k_x >= 0.0) || !(k_r >= 0.0) || !std::isfinite(k_x) ||
      !std::isfinite(k_r))
    throw DomainError("pulse wave numbers must be non-negative");
  if (!std::isfinite(amp_forward) || !std::isfinite(amp_reflected))
    throw DomainError("pulse amplitudes must be finite");
}

PulseSpec::PulseSpec(double omega, double amp_forward, double amp_reflected,
                     double k_x, double k_r, double c)
    : PulseSpec(Unchecked{}, omega, amp_forward, amp_reflected, k_x, k_r, c) {
  const double lhs = omega * omega;
  const double rhs = c * c * (k_x * k_x + k_r * k_r);
  if (std::abs(lhs - rhs) > 1e-10 * lhs)
    throw DomainError("pulse violates omega^2 = c^2 (k_x^2 + k_r^2)");
}

PulseSpec PulseSpec::from_angle(double omega, double c, double amp_forward,
                                double amp_reflected, double angle) {
  const double k = omega / c;
  return PulseSpec(omega, amp_forward, amp_reflected,
                   std::abs(k * std::cos(angle)),
                   std::abs(k * std::sin(angle)), c);
}

PulseSpec PulseSpec::unchecked(double omega, double amp_forward,
                               double amp_reflected, double k_x, double k_r,
                               double c) {
  return PulseSpec(Unchecked{}, omega, amp_forward, amp_reflected, k_x, k_r, c);
}

double PulseSpec::frequency() const { return omega_ / kTwoPi; }

double PulseSpec::wavelength() const {
  return kTwoPi / std::hypot(k_x_, k_r_);
}

double PulseSpec::period() const { return kTwoPi / omega_; }

PulseSpec PulseSpec::with_speed(double c) const {
  if (!positive_finite(c))
    throw DomainError("pulse sound speed must be positive");
  const double scale = c_ / c;
  return PulseSpec(omega_, amp_forward_, amp_reflected_, k_x_ * scale,
                   k_r_ * scale, c);
}

EchoTrace::EchoTrace(std::vector<double> samples, double fs, double t0,
                     std::string session_id)
    : samples_(std::move(samples)), fs_(fs), t0_(t0),
      session_id_(std::move(session_id)) {
  if (!positive_finite(fs))
    throw DomainError("echo trace sample rate must be positive");
  if (samples_.size() < 2)
    throw DomainError("echo trace needs at least two samples");
  if (!std::isfinite(t0))
    throw DomainError("echo trace start time must be finite");
  for (double v : samples_)
    if (!std::isfinite(v))
      throw DomainError("echo trace samples must be finite");
}

EchoTrace EchoTrace::relabel(std::string session_id) const {
  EchoTrace copy = *this;
  copy.session_id_ = std::move(session_id);
  return copy;
}

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

std::complex<double> wave_field(const PulseSpec &pulse, double x, double r,
                                double t) {
  using namespace std::complex_literals;
  const double common = pulse.omega() * t - pulse.k_x() * x;
  const double radial = pulse.k_r() * r;
  return pulse.amp_forward() * std::exp(1i * (common - radial)) +
         pulse.amp_reflected() * std::exp(1i * (common + radial));
}

std::size_t SampleRange::count() const {
  if (!positive_finite(step) || !(max >= min) || !std::isfinite(max) ||
      !std::isfinite(min))
    return 0;
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

SampleBox SampleBox::around_origin(const PulseSpec &pulse,
                                   double per_wavelength, std::size_t points) {
  const double hs = pulse.wavelength() / per_wavelength;
  const double ht = pulse.period() / per_wavelength;
  const double span = static_cast<double>(points - 1);
  return SampleBox{{0.0, span * hs, hs}, {0.0, span * hs, hs},
                   {0.0, span * ht, ht}};
}

double wave_equation_residual(const PulseSpec &pulse, const SampleBox &box) {
  const std::size_t nx = box.x.count();
  const std::size_t nr = box.r.count();
  const std::size_t nt = box.t.count();
  if (nx < 3 || nr < 3 || nt < 3)
    throw DomainError("residual box needs at least three samples per axis");

  const double hx = box.x.step;
  const double hr = box.r.step;
  const double ht = box.t.step;
  const double inv_c2 = 1.0 / (pulse.c() * pulse.c());

  auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
    return wave_field(pulse, box.x.min + static_cast<double>(i) * hx,
                      box.r.min + static_cast<double>(j) * hr,
                      box.t.min + static_cast<double>(k) * ht);
  };

  double peak = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      for (std::size_t k = 0; k < nt; ++k) {
        const auto p = at(i, j, k);
        peak = std::max(peak, std::abs(p));
        if (i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == nr ||
            k + 1 == nt)
          continue;
        const auto pxx = (at(i + 1, j, k) - 2.0 * p + at(i - 1, j, k)) / (hx * hx);
        const auto prr = (at(i, j + 1, k) - 2.0 * p + at(i, j - 1, k)) / (hr * hr);
        const auto ptt = (at(i, j, k + 1) - 2.0 * p + at(i, j, k - 1)) / (ht * ht);
        worst = std::max(worst, std::abs(pxx + prr - inv_c2 * ptt));
      }
    }
  }
  if (peak == 0.0)
    return 0.0;
  double k2 = pulse.k_x() * pulse.k_x() + pulse.k_r() * pulse.k_r();
  if (k2 == 0.0)
    k2 = pulse.omega() * pulse.omega() * inv_c2;
  return worst / (peak * k2);
}

// ---------------------------------------------------------------------------
// Echo synthesis
// ---------------------------------------------------------------------------

double reflection_coefficient(double area_left, double area_right,
                              const hemo::ArteryModel &model) {
  if (!positive_finite(area_left) || !positive_finite(area_right))
    throw DomainError("reflection coefficient needs positive areas");
  const double z_left = model.rho * model.c0 / area_left;
  const double z_right = model.rho * model.c0 / area_right;
  return (z_right - z_left) / (z_right + z_left);
}

double windowed_pulse(const PulseSpec &pulse, double n_cycles, double t) {
  const double len = pulse_length(pulse, n_cycles);
  if (std::abs(t) > 0.5 * len)
    return 0.0;
  const double hann = 0.5 * (1.0 + std::cos(kTwoPi * t / len));
  return pulse.amp_forward() * hann * std::cos(pulse.omega() * t);
}

double round_trip_duration(const hemo::Grid &grid, double c) {
  return 2.0 * grid.length() / c;
}

void validate_echo_options(const PulseSpec &pulse, const hemo::Grid &grid,
                           const EchoOptions &opts) {
  check_pulse_sampling(pulse, opts);
  const double needed = round_trip_duration(grid, pulse.c());
  if (!(opts.duration >= needed * (1.0 - 1e-12)))
    throw ConfigurationError("echo duration " + std::to_string(opts.duration) +
                             " s does not cover the round trip " +
                             std::to_string(needed) + " s");
}

EchoModel::EchoModel(const PulseSpec &pulse, const hemo::Grid &grid,
                     const hemo::ArteryModel &model, const EchoOptions &opts)
    : pulse_(pulse), model_(model), opts_(opts), dx_(grid.dx()) {
  validate_echo_options(pulse, grid, opts);
  model.validate();
  const double len = pulse_length(pulse, opts.n_cycles);
  const auto axis = TimeAxis::make(len, opts.duration, opts.fs);
  n0_ = axis.n0;
  t0_ = axis.time(0);
  size_ = axis.size;

  auto sample_arrival = [&](double centre) {
    Arrival a;
    const auto [first, count] = axis.span(centre, 0.5 * len);
    a.first = first;
    a.shape.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
      const double t = axis.time(static_cast<long long>(first + n));
      a.shape[n] = windowed_pulse(pulse, opts.n_cycles, t - centre);
    }
    return a;
  };

  arrivals_.reserve(grid.nx());
  for (std::size_t i = 0; i < grid.nx(); ++i)
    arrivals_.push_back(sample_arrival(arrival_time(i)));
  incident_ = sample_arrival(0.0);
}

double EchoModel::arrival_time(std::size_t i) const {
  return 2.0 * static_cast<double>(i) * dx_ / pulse_.c();
}

std::vector<double> EchoModel::amplitudes(std::span<const double> radii) const {
  if (radii.size() != arrivals_.size())
    throw DomainError("radii column has " + std::to_string(radii.size()) +
                      " cells, echo model expects " +
                      std::to_string(arrivals_.size()));
  std::vector<double> amp(radii.size());
  double prev_area = model_.baseline_area();
  double transmission = 1.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double area = hemo::area_from_radius(radii[i]);
    const double gamma = reflection_coefficient(prev_area, area, model_);
    amp[i] = gamma * transmission;
    transmission *= 1.0 - gamma * gamma;
    prev_area = area;
  }
  return amp;
}

void EchoModel::render(std::span<const double> radii,
                       std::vector<double> &out) const {
  const auto amp = amplitudes(radii);
  out.assign(size_, 0.0);
  for (std::size_t i = 0; i < arrivals_.size(); ++i) {
    if (amp[i] == 0.0)
      continue;
    const auto &a = arrivals_[i];
    for (std::size_t n = 0; n < a.shape.size(); ++n)
      out[a.first + n] += amp[i] * a.shape[n];
  }
}

EchoTrace EchoModel::synthesize(std::span<const double> radii,
                                std::string session_id) const {
  std::vector<double> out;
  render(radii, out);
  return EchoTrace(std::move(out), opts_.fs, t0_, std::move(session_id));
}

EchoTrace EchoModel::incident(std::string session_id) const {
  std::vector<double> out(size_, 0.0);
  std::copy(incident_.shape.begin(), incident_.shape.end(),
            out.begin() + static_cast<std::ptrdiff_t>(incident_.first));
  return EchoTrace(std::move(out), opts_.fs, t0_, std::move(session_id));
}

EchoTrace synthesize_echo(std::span<const double> radii,
                          const PulseSpec &pulse, const hemo::Grid &grid,
                          const hemo::ArteryModel &model,
                          const EchoOptions &opts) {
  return EchoModel(pulse, grid, model, opts).synthesize(radii);
}

namespace {

EchoTrace ranging_trace(const PulseSpec &pulse, double path_length,
                        double reflectivity, const EchoOptions &opts,
                        std::string session_id, bool echo) {
  check_pulse_sampling(pulse, opts);
  if (!positive_finite(path_length))
    throw DomainError("ranging path length must be positive");
  const double delay = 2.0 * path_length / pulse.c();
  const double len = pulse_length(pulse, opts.n_cycles);
  // leave room for a slower medium than the nominal one
  const double duration = std::max(opts.duration, 1.25 * delay);
  const auto axis = TimeAxis::make(len, duration, opts.fs);
  const double centre = echo ? delay : 0.0;
  const double gain = echo ? reflectivity : 1.0;
  std::vector<double> out(axis.size, 0.0);
  const auto [first, count] = axis.span(centre, 0.5 * len);
  for (std::size_t n = first; n < first + count; ++n)
    out[n] = gain * windowed_pulse(pulse, opts.n_cycles,
                                   axis.time(static_cast<long long>(n)) - centre);
  return EchoTrace(std::move(out), opts.fs, axis.time(0),
                   std::move(session_id));
}

} // namespace

EchoTrace ranging_echo(const PulseSpec &pulse, double path_length,
                       double reflectivity, const EchoOptions &opts,
                       std::string session_id) {
  return ranging_trace(pulse, path_length, reflectivity, opts,
                       std::move(session_id), true);
}

EchoTrace ranging_incident(const PulseSpec &pulse, double path_length,
                           const EchoOptions &opts, std::string session_id) {
  return ranging_trace(pulse, path_length, 1.0, opts, std::move(session_id),
                       false);
}

// ---------------------------------------------------------------------------
// Time of flight
// ---------------------------------------------------------------------------

ToFMeasurement estimate_tof(const EchoTrace &incident, const EchoTrace &echo,
                            const TofOptions &opts) {
  if (incident.fs() != echo.fs())
    throw EstimationError("incident and echo sample rates differ");

  const auto &x = incident.samples();
  const auto &y = echo.samples();

  // restrict the reference to its non-zero support
  const auto nz = [](double v) { return v != 0.0; };
  const auto first_it = std::find_if(x.begin(), x.end(), nz);
  if (first_it == x.end())
    throw EstimationError("incident trace is all zero");
  if (std::none_of(y.begin(), y.end(), nz))
    throw EstimationError("echo trace is all zero");
  const auto last_it = std::find_if(x.rbegin(), x.rend(), nz);
  const auto first = static_cast<long long>(first_it - x.begin());
  const auto last = static_cast<long long>(x.rend() - last_it) - 1;

  double ex = 0.0;
  for (long long n = first; n <= last; ++n)
    ex += x[n] * x[n];
  double ey = 0.0;
  for (double v : y)
    ey += v * v;
  const double norm = std::sqrt(ex) * std::sqrt(ey);

  const auto ny = static_cast<long long>(y.size());
  // lag k aligns x[n] with y[n + k]
  const long long kmin = -last;
  const long long kmax = ny - 1 - first;
  auto corr = [&](long long k) {
    const long long lo = std::max(first, -k);
    const long long hi = std::min(last, ny - 1 - k);
    double s = 0.0;
    for (long long n = lo; n <= hi; ++n)
      s += x[n] * y[n + k];
    return s / norm;
  };

  const double fs = echo.fs();
  const double offset = echo.t0() - incident.t0();
  // only non-negative delays are physical
  const long long kstart =
      std::max(kmin, static_cast<long long>(std::ceil(-offset * fs - 1e-9)));

  long long best = kstart;
  double best_val = corr(kstart);
  for (long long k = kstart + 1; k <= kmax; ++k) {
    const double v = corr(k);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best_val < opts.min_peak)
    throw LowConfidenceError(best_val, opts.min_peak);

  double frac = 0.0;
  if (best > kmin && best < kmax) {
    const double ym = corr(best - 1);
    const double yp = corr(best + 1);
    const double denom = ym - 2.0 * best_val + yp;
    if (denom < 0.0)
      frac = 0.5 * (ym - yp) / denom;
  }

  ToFMeasurement m;
  m.tof = std::max(0.0, (static_cast<double>(best) + frac) / fs + offset);
  m.peak_correlation = std::clamp(best_val, -1.0, 1.0);
  m.session_id = echo.session_id();
  return m;
}

DensityEstimate density_change(const ToFMeasurement &tof_ref,
                               const ToFMeasurement &tof_new,
                               bool bulk_modulus_fixed) {
  if (!positive_finite(tof_ref.tof))
    throw DomainError("reference time of flight must be positive");
  if (!positive_finite(tof_new.tof))
    throw DomainError("new time of flight must be positive");
  if (!bulk_modulus_fixed)
    throw DomainError("density cannot be inferred from time of flight unless "
                      "the bulk modulus is held fixed");
  const double q = tof_new.tof / tof_ref.tof;
  DensityEstimate d;
  d.ratio = q * q;
  d.fractional_change = d.ratio - 1.0;
  d.bulk_modulus_fixed = true;
  d.path_fixed = true;
  return d;
}

} // namespace vasosim::acoustics
