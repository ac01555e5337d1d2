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

#ifndef VASOSIM_CONFIG_HPP
#define VASOSIM_CONFIG_HPP

// Run configuration shared by every command.
//
// Files are INI-style: "[section]" headers followed by "key = value" lines,
// '#' or ';' comments. Every key is addressed as "section.key"; unknown keys
// are rejected. See docs/config.md for the full table.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "vasosim/acoustics.hpp"
#include "vasosim/hemogrid.hpp"
#include "vasosim/inversion.hpp"
#include "vasosim/risk.hpp"
#include "vasosim/synthdata.hpp"

namespace vasosim::app {

struct RunConfig {
  // [model]
  double r0 = 2e-3;
  double beta = 0.0;        ///< 0 derives beta from wave_speed
  double wave_speed = 5.0;  ///< pulse-wave speed used when beta = 0 [m/s]
  double p_ext = 0.0;
  double rho = 1060.0;
  double mu = 3.5e-3;
  double alpha = 3.0;
  double re = 100.0;

  // [grid]
  std::size_t nx = 64;
  std::size_t nt = 2000;
  double dx = 1e-3;
  double dt = 1e-4;
  double max_speed = 10.0;
  double cfl = 1.0;

  // [flow]
  std::string boundary = "inlet"; ///< inlet | periodic
  double inlet_amplitude = 400.0;
  double inlet_frequency = 1.2;
  std::string waveform;           ///< optional t_s,p_pa table for the inlet
  double bump_amplitude = 0.0;    ///< initial radius bump, fraction of r0
  long bump_center = -1;          ///< cell; -1 is the middle
  double bump_width = 8.0;        ///< cells (FWHM)

  // [pulse]
  double frequency = 5e6;
  double c = 1540.0;
  double amp_forward = 1.0;
  double amp_reflected = 0.0;
  double angle = 0.0;

  // [echo]
  double fs = 50e6;
  double n_cycles = 5.0;
  double duration = 0.0;   ///< 0 listens for one round trip
  double noise_rms = 0.0;  ///< fraction of the noiseless RMS
  long column = -1;        ///< radii time level to image; -1 is the last
  double ranging_path = 0.02;
  double ranging_reflectivity = 0.5;
  double min_peak = 0.2;

  // [inversion]
  std::string solver = "gauss-descent";
  double lambda = 1e-4;
  std::size_t max_iter = 500;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  double objective_tol = 1e-20;
  double fd_step = 1e-6;

  // [risk]
  std::string provider = "logistic"; ///< logistic | llm
  std::vector<double> weights{8.0, 20.0, 1.5};
  double bias = -4.0;
  double decay = 0.1;
  int horizon = 24;
  double step_seconds = 3600.0;

  // [llm]
  std::string endpoint;
  double timeout = 5.0;
  std::string template_version = "v1";
  int max_retries = 2;
  double backoff = 0.05;
  int max_in_flight = 4;

  // [alert]
  double critical_prob = 0.8;
  int critical_horizon = 0;
  double warn_prob = 0.5;
  std::string dispatch_from = "warn";
  std::string webhook;  ///< empty writes alerts.jsonl in the output dir
  double webhook_timeout = 5.0;

  // [scenario]
  std::string kind = "progressive-occlusion";
  double severity = 0.6;
  long center = -1; ///< cell; -1 is the middle
  double width = 8.0;
  std::size_t sessions = 6;
  double occlusion_threshold = 0.6;
  double density_drift = 0.05;
  double session_interval = 3600.0;
  double scenario_noise = 0.01;

  // [run]
  std::uint64_t seed = 0;
  std::string input;
  std::string out = "out";

  /// Sets "section.key" from its text form. Throws ConfigurationError.
  void set(const std::string &key, const std::string &value);

  /// Every accepted "section.key".
  static std::vector<std::string> keys();

  /// Checks every parameter group. Throws ConfigurationError.
  void validate() const;

  hemo::ArteryModel model() const;
  hemo::Grid grid() const;
  hemo::Boundary boundary_kind() const;
  acoustics::PulseSpec pulse() const;
  acoustics::EchoOptions echo_options() const;
  inversion::SolverOptions solver_options() const;
  risk::AlertPolicy policy() const;
  risk::LlmOptions llm_options() const;
  synth::ScenarioSpec scenario() const;

  /// Builds the selected likelihood provider.
  std::shared_ptr<risk::LikelihoodProvider> make_provider() const;
};

/// Applies every key of an INI file on top of `config`.
/// Throws ConfigurationError (also for unreadable files).
void load_config_file(RunConfig &config, const std::filesystem::path &path);

/// Parses INI text.
void load_config_text(RunConfig &config, const std::string &text);

} // namespace vasosim::app

#endif // VASOSIM_CONFIG_HPP
