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

#include "vasosim/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vasosim/errors.hpp"
#include "vasosim/io.hpp"

namespace vasosim::app {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T> T parse_value(const std::string &key, const std::string &raw) {
  const std::string text = trim(raw);
  auto bad = [&](const char *what) {
    return ConfigurationError(key + ": expected " + what + ", got '" + text + "'");
  };
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, double>) {
    try {
      const double v = io::parse_double(text);
      if (!std::isfinite(v))
        throw bad("a finite number");
      return v;
    } catch (const FormatError &) {
      throw bad("a number");
    }
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(parse_value<double>(key, item));
    return out;
  } else {
    static_assert(std::is_integral_v<T>);
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
      throw bad(std::is_unsigned_v<T> ? "a non-negative integer" : "an integer");
    return v;
  }
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;

template <class T> Setter field(T RunConfig::*member) {
  return [member](RunConfig &c, const std::string &key, const std::string &v) {
    c.*member = parse_value<T>(key, v);
  };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"model.r0", field(&RunConfig::r0)},
      {"model.beta", field(&RunConfig::beta)},
      {"model.wave_speed", field(&RunConfig::wave_speed)},
      {"model.p_ext", field(&RunConfig::p_ext)},
      {"model.rho", field(&RunConfig::rho)},
      {"model.mu", field(&RunConfig::mu)},
      {"model.alpha", field(&RunConfig::alpha)},
      {"model.re", field(&RunConfig::re)},

      {"grid.nx", field(&RunConfig::nx)},
      {"grid.nt", field(&RunConfig::nt)},
      {"grid.dx", field(&RunConfig::dx)},
      {"grid.dt", field(&RunConfig::dt)},
      {"grid.max_speed", field(&RunConfig::max_speed)},
      {"grid.cfl", field(&RunConfig::cfl)},

      {"flow.boundary", field(&RunConfig::boundary)},
      {"flow.inlet_amplitude", field(&RunConfig::inlet_amplitude)},
      {"flow.inlet_frequency", field(&RunConfig::inlet_frequency)},
      {"flow.waveform", field(&RunConfig::waveform)},
      {"flow.bump_amplitude", field(&RunConfig::bump_amplitude)},
      {"flow.bump_center", field(&RunConfig::bump_center)},
      {"flow.bump_width", field(&RunConfig::bump_width)},

      {"pulse.frequency", field(&RunConfig::frequency)},
      {"pulse.c", field(&RunConfig::c)},
      {"pulse.amp_forward", field(&RunConfig::amp_forward)},
      {"pulse.amp_reflected", field(&RunConfig::amp_reflected)},
      {"pulse.angle", field(&RunConfig::angle)},

      {"echo.fs", field(&RunConfig::fs)},
      {"echo.n_cycles", field(&RunConfig::n_cycles)},
      {"echo.duration", field(&RunConfig::duration)},
      {"echo.noise_rms", field(&RunConfig::noise_rms)},
      {"echo.column", field(&RunConfig::column)},
      {"echo.ranging_path", field(&RunConfig::ranging_path)},
      {"echo.ranging_reflectivity", field(&RunConfig::ranging_reflectivity)},
      {"echo.min_peak", field(&RunConfig::min_peak)},

      {"inversion.solver", field(&RunConfig::solver)},
      {"inversion.lambda", field(&RunConfig::lambda)},
      {"inversion.max_iter", field(&RunConfig::max_iter)},
      {"inversion.grad_tol", field(&RunConfig::grad_tol)},
      {"inversion.step_tol", field(&RunConfig::step_tol)},
      {"inversion.objective_tol", field(&RunConfig::objective_tol)},
      {"inversion.fd_step", field(&RunConfig::fd_step)},

      {"risk.provider", field(&RunConfig::provider)},
      {"risk.weights", field(&RunConfig::weights)},
      {"risk.bias", field(&RunConfig::bias)},
      {"risk.decay", field(&RunConfig::decay)},
      {"risk.horizon", field(&RunConfig::horizon)},
      {"risk.step_seconds", field(&RunConfig::step_seconds)},

      {"llm.endpoint", field(&RunConfig::endpoint)},
      {"llm.timeout", field(&RunConfig::timeout)},
      {"llm.template_version", field(&RunConfig::template_version)},
      {"llm.max_retries", field(&RunConfig::max_retries)},
      {"llm.backoff", field(&RunConfig::backoff)},
      {"llm.max_in_flight", field(&RunConfig::max_in_flight)},

      {"alert.critical_prob", field(&RunConfig::critical_prob)},
      {"alert.critical_horizon", field(&RunConfig::critical_horizon)},
      {"alert.warn_prob", field(&RunConfig::warn_prob)},
      {"alert.dispatch_from", field(&RunConfig::dispatch_from)},
      {"alert.webhook", field(&RunConfig::webhook)},
      {"alert.webhook_timeout", field(&RunConfig::webhook_timeout)},

      {"scenario.kind", field(&RunConfig::kind)},
      {"scenario.severity", field(&RunConfig::severity)},
      {"scenario.center", field(&RunConfig::center)},
      {"scenario.width", field(&RunConfig::width)},
      {"scenario.sessions", field(&RunConfig::sessions)},
      {"scenario.occlusion_threshold", field(&RunConfig::occlusion_threshold)},
      {"scenario.density_drift", field(&RunConfig::density_drift)},
      {"scenario.session_interval", field(&RunConfig::session_interval)},
      {"scenario.noise", field(&RunConfig::scenario_noise)},

      {"run.seed", field(&RunConfig::seed)},
      {"run.input", field(&RunConfig::input)},
      {"run.out", field(&RunConfig::out)},
  };
  return table;
}

std::size_t resolve_cell(long requested, std::size_t nx) {
  return requested < 0 ? nx / 2 : static_cast<std::size_t>(requested);
}

} // namespace

void RunConfig::set(const std::string &key, const std::string &value) {
  const auto &table = setters();
  const auto it = table.find(key);
  if (it == table.end())
    throw ConfigurationError("unknown configuration key '" + key + "'");
  it->second(*this, key, value);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto &[k, _] : setters())
    out.push_back(k);
  return out;
}

hemo::ArteryModel RunConfig::model() const {
  hemo::ArteryModel m;
  m.r0 = r0;
  m.rho = rho;
  m.mu = mu;
  m.p_ext = p_ext;
  m.alpha = alpha;
  m.re = re;
  m.c0 = c;
  m.beta = beta > 0.0 ? beta : hemo::ArteryModel::beta_for_wave_speed(r0, rho, wave_speed);
  return m;
}

hemo::Grid RunConfig::grid() const { return hemo::Grid(nx, nt, dx, dt, max_speed, cfl); }

hemo::Boundary RunConfig::boundary_kind() const {
  if (boundary == "periodic")
    return hemo::Boundary::periodic;
  if (boundary == "inlet")
    return hemo::Boundary::inlet_pressure;
  throw ConfigurationError("flow.boundary must be 'inlet' or 'periodic', got '" +
                           boundary + "'");
}

acoustics::PulseSpec RunConfig::pulse() const {
  return acoustics::PulseSpec::from_angle(2.0 * std::numbers::pi * frequency, c,
                                          amp_forward, amp_reflected, angle);
}

acoustics::EchoOptions RunConfig::echo_options() const {
  acoustics::EchoOptions o;
  o.fs = fs;
  o.n_cycles = n_cycles;
  o.duration = duration > 0.0 ? duration : acoustics::round_trip_duration(grid(), c);
  return o;
}

inversion::SolverOptions RunConfig::solver_options() const {
  inversion::SolverOptions o;
  o.max_iter = max_iter;
  o.grad_tol = grad_tol;
  o.step_tol = step_tol;
  o.objective_tol = objective_tol;
  o.fd_step = fd_step;
  return o;
}

risk::AlertPolicy RunConfig::policy() const {
  risk::AlertPolicy p;
  p.critical_prob = critical_prob;
  p.critical_horizon = critical_horizon;
  p.warn_prob = warn_prob;
  p.dispatch_from = risk::severity_from_string(dispatch_from);
  return p;
}

risk::LlmOptions RunConfig::llm_options() const {
  risk::LlmOptions o;
  o.endpoint = endpoint;
  o.timeout = timeout;
  o.template_version = template_version;
  o.max_retries = max_retries;
  o.backoff = backoff;
  o.max_in_flight = max_in_flight;
  return o;
}

synth::ScenarioSpec RunConfig::scenario() const {
  synth::ScenarioSpec s;
  s.kind = synth::scenario_kind_from_string(kind);
  s.severity = severity;
  s.stenosis_center = resolve_cell(center, nx);
  s.stenosis_width = width;
  s.noise_rms = scenario_noise;
  s.seed = seed;
  s.sessions = sessions;
  s.grid = grid();
  s.model = model();
  s.pulse = pulse();
  s.fs = fs;
  s.n_cycles = n_cycles;
  s.occlusion_threshold = occlusion_threshold;
  s.horizon = horizon;
  s.density_drift = density_drift;
  s.ranging_path = ranging_path;
  s.ranging_reflectivity = ranging_reflectivity;
  s.inlet_amplitude = inlet_amplitude;
  s.inlet_frequency = inlet_frequency;
  s.session_interval = session_interval;
  return s;
}

std::shared_ptr<risk::LikelihoodProvider> RunConfig::make_provider() const {
  if (provider == "logistic")
    return risk::logistic_provider(weights, bias, decay);
  if (provider == "llm")
    return risk::llm_provider(llm_options());
  throw ConfigurationError("risk.provider must be 'logistic' or 'llm', got '" +
                           provider + "'");
}

void RunConfig::validate() const {
  try {
    model().validate();
    const auto g = grid();
    boundary_kind();
    if (!(bump_amplitude > -1.0 && bump_amplitude < 1.0))
      throw ConfigurationError("flow.bump_amplitude must lie in (-1, 1)");
    if (!(bump_width > 0.0))
      throw ConfigurationError("flow.bump_width must be positive");
    if (bump_center >= static_cast<long>(nx))
      throw ConfigurationError("flow.bump_center lies outside the grid");
    if (!(inlet_frequency >= 0.0))
      throw ConfigurationError("flow.inlet_frequency must be non-negative");

    acoustics::validate_echo_options(pulse(), g, echo_options());
    if (!(noise_rms >= 0.0))
      throw ConfigurationError("echo.noise_rms must be non-negative");
    if (!(min_peak > 0.0 && min_peak <= 1.0))
      throw ConfigurationError("echo.min_peak must lie in (0, 1]");
    if (!(ranging_path > 0.0))
      throw ConfigurationError("echo.ranging_path must be positive");

    solver_options().validate();
    if (!inversion::SolverRegistry::global().contains(solver))
      throw ConfigurationError("unknown solver '" + solver + "'");
    if (!(lambda >= 0.0))
      throw ConfigurationError("inversion.lambda must be non-negative");

    if (provider != "logistic" && provider != "llm")
      throw ConfigurationError("risk.provider must be 'logistic' or 'llm', got '" +
                               provider + "'");
    if (provider == "logistic")
      risk::LogisticProvider(weights, bias, decay);
    else
      llm_options().validate();
    if (horizon < 1)
      throw ConfigurationError("risk.horizon must be at least 1");
    if (!(step_seconds > 0.0))
      throw ConfigurationError("risk.step_seconds must be positive");

    policy().validate();
    scenario().validate();
    if (!webhook.empty()) {
      risk::split_http_url(webhook);
      if (!(webhook_timeout > 0.0))
        throw ConfigurationError("alert.webhook_timeout must be positive");
    }
    if (out.empty())
      throw ConfigurationError("run.out must not be empty");
  } catch (const ConfigurationError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigurationError(e.what());
  }
}

void load_config_text(RunConfig &config, const std::string &text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigurationError("config line " + std::to_string(e.line()) + ": " +
                             e.message());
  }
  // apply to a copy so a bad key leaves `config` untouched
  RunConfig next = config;
  for (const auto &[section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty())
        throw ConfigurationError("config key '" + section +
                                 "' is outside any [section]");
      continue;
    }
    for (const auto &[key, value] : body)
      next.set(section + "." + key, value.data());
  }
  config = std::move(next);
}

void load_config_file(RunConfig &config, const std::filesystem::path &path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const FormatError &) {
    throw ConfigurationError("cannot read config file " + path.string());
  }
  load_config_text(config, text);
}

} // namespace vasosim::app
