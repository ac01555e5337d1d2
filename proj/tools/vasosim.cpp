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

// vasosim command-line driver. Talks to the library through the C API only.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vasosim/vasosim.h"

namespace {

using ConfigPtr = std::unique_ptr<vasosim_config, decltype(&vasosim_config_destroy)>;

int report(vasosim_status s, const char *what) {
  if (s != VASOSIM_OK)
    std::fprintf(stderr, "vasosim: %s: %s\n", what, vasosim_last_error());
  return static_cast<int>(s);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Arterial flow, echo inversion and episode-risk toolkit", "vasosim"};
  app.set_version_flag("--version", std::string(vasosim_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> seed, solver, provider, endpoint, out, input, lambda,
      max_iter;
  std::vector<std::string> overrides;
  bool list_keys = false;

  app.add_option("--config", config_path,
                 "INI config file (default: $VASOSIM_CONFIG if set)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--solver", solver, "inversion solver name");
  app.add_option("--provider", provider, "likelihood provider: logistic or llm");
  app.add_option("--endpoint", endpoint, "LLM endpoint URL");
  app.add_option("--out", out, "output directory");
  app.add_option("--input", input, "input file for echo, invert, assess");
  app.add_option("--lambda", lambda, "regularisation weight");
  app.add_option("--max-iter", max_iter, "solver iteration cap");
  app.add_option("--set", overrides, "override a config key: section.key=value");
  app.add_flag("--list-keys", list_keys, "print accepted config keys and exit");

  const std::map<std::string, vasosim_status (*)(const vasosim_config *)> commands = {
      {"simulate", vasosim_cmd_simulate}, {"echo", vasosim_cmd_echo},
      {"invert", vasosim_cmd_invert},     {"assess", vasosim_cmd_assess},
      {"gen-data", vasosim_cmd_gen_data}, {"pipeline", vasosim_cmd_pipeline}};
  const std::map<std::string, std::string> help = {
      {"simulate", "run the flow solver; writes radii.csv, flow_summary.json"},
      {"echo", "synthesize an echo from a radii file; writes echo.csv"},
      {"invert", "recover radii from an echo; writes solution.json"},
      {"assess", "likelihood curve, time to episode and alert"},
      {"gen-data", "write a seeded synthetic dataset"},
      {"pipeline", "generate, invert and assess a whole scenario"}};
  for (const auto &[name, _] : commands)
    app.add_subcommand(name, help.at(name))->fallthrough();

  // --list-keys works without a subcommand
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--list-keys") {
      for (size_t k = 0; k < vasosim_config_key_count(); ++k)
        std::printf("%s\n", vasosim_config_key(k));
      return 0;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return VASOSIM_ERR_INPUT;
  }

  vasosim_config *raw = nullptr;
  if (report(vasosim_config_create(&raw), "config") != 0)
    return VASOSIM_ERR_INTERNAL;
  ConfigPtr config(raw, vasosim_config_destroy);

  if (config_path.empty())
    if (const char *env = std::getenv("VASOSIM_CONFIG"); env && *env)
      config_path = env;
  if (!config_path.empty())
    if (int rc = report(vasosim_config_load_file(config.get(), config_path.c_str()),
                        config_path.c_str()))
      return rc;

  const std::pair<const char *, const std::optional<std::string> *> flags[] = {
      {"run.seed", &seed},           {"inversion.solver", &solver},
      {"risk.provider", &provider},  {"llm.endpoint", &endpoint},
      {"run.out", &out},             {"run.input", &input},
      {"inversion.lambda", &lambda}, {"inversion.max_iter", &max_iter}};
  for (const auto &[key, value] : flags)
    if (value->has_value())
      if (int rc = report(vasosim_config_set(config.get(), key, (*value)->c_str()), key))
        return rc;
  for (const auto &kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "vasosim: --set expects section.key=value, got '%s'\n",
                   kv.c_str());
      return VASOSIM_ERR_INPUT;
    }
    const std::string key = kv.substr(0, eq);
    if (int rc = report(vasosim_config_set(config.get(), key.c_str(),
                                           kv.substr(eq + 1).c_str()),
                        key.c_str()))
      return rc;
  }

  const auto *sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const vasosim_status s = commands.at(name)(config.get());
  if (s == VASOSIM_OK) {
    std::printf("%s: %s\n", name.c_str(), vasosim_last_message());
    return 0;
  }
  return report(s, name.c_str());
}
