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

#ifndef VASOSIM_COMMANDS_HPP
#define VASOSIM_COMMANDS_HPP

// Pipeline commands behind the CLI. Each one validates the configuration and
// its inputs before touching the output directory, then returns an exit code:
//
//   0 success, 2 input/config, 3 simulation, 4 not converged, 5 provider,
//   1 anything else.
//
// Outputs (relative to config.out):
//   simulate  radii.csv, flow_summary.json
//   echo      echo.csv
//   invert    solution.json
//   assess    likelihood.csv, tte.json, alerts.jsonl (when triggered)
//   gen-data  manifest.json, sNNN_{radii,echo,ranging}.csv
//   pipeline  dataset/, sessions/sNNN/*, alerts.jsonl, summary.json,
//             manifest.json

#include <exception>
#include <string>

#include <nlohmann/json.hpp>

#include "vasosim/config.hpp"

namespace vasosim::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitSimulation = 3,
  kExitNotConverged = 4,
  kExitProvider = 5,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception &e);

/// Outcome of a command: the exit code and a one-line message (the error on
/// failure, a short summary otherwise).
struct CommandResult {
  int code = kExitOk;
  std::string message;
};

CommandResult cmd_simulate(const RunConfig &config);
CommandResult cmd_echo(const RunConfig &config);
CommandResult cmd_invert(const RunConfig &config);
CommandResult cmd_assess(const RunConfig &config);
CommandResult cmd_gen_data(const RunConfig &config);
CommandResult cmd_pipeline(const RunConfig &config);

/// Dispatches by name ("simulate", "echo", ..., "gen-data", "pipeline").
CommandResult run_command(const std::string &name, const RunConfig &config);

nlohmann::json to_json(const inversion::InverseSolution &s);

} // namespace vasosim::app

#endif // VASOSIM_COMMANDS_HPP
