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

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "vasosim/commands.hpp"
#include "vasosim/config.hpp"
#include "vasosim/errors.hpp"
#include "vasosim/io.hpp"
#include "vasosim/risk.hpp"

using namespace vasosim;
using namespace vasosim::app;
namespace fs = std::filesystem;
using testsupport::TempDir;

namespace {

nlohmann::json read_json(const fs::path &p) {
  return nlohmann::json::parse(io::read_file(p));
}

RunConfig small_config(const fs::path &out) {
  RunConfig c;
  c.nt = 400;
  c.sessions = 3;
  c.horizon = 6;
  c.seed = 42;
  c.out = out.string();
  return c;
}

} // namespace

// ---------------------------------------------------------------------------
// io
// ---------------------------------------------------------------------------

TEST_CASE("numbers round trip through text") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double v = u(rng) * std::pow(10.0, (k % 40) - 20);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::min())) ==
        std::numeric_limits<double>::min());
  CHECK_THROWS_AS(io::parse_double("1.5x"), FormatError);
  CHECK_THROWS_AS(io::parse_double(""), FormatError);
}

TEST_CASE("sha256") {
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(io::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("radii file round trip") {
  const hemo::Grid g(4, 3, 1e-3, 1e-4, 10.0);
  std::vector<double> v(12);
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = 2e-3 * (1.0 + 0.01 * std::sin(static_cast<double>(k)));
  const hemo::RadiiField f(g, v);
  const std::string text = io::radii_csv(f);
  CHECK(text.rfind("# 4,3,", 0) == 0);
  const auto back = io::parse_radii_csv(text);
  CHECK(back.nx() == 4);
  CHECK(back.nt() == 3);
  CHECK(back.grid().dx() == g.dx());
  CHECK(back.grid().dt() == g.dt());
  CHECK(back.values() == f.values());

  CHECK_THROWS_AS(io::parse_radii_csv("4,3\n"), FormatError);
  CHECK_THROWS_AS(io::parse_radii_csv("# 4,3,0.001,0.0001\n1,2,3,4\n"), FormatError);
  CHECK_THROWS_AS(io::parse_radii_csv("# 2,1,0.001,0.0001\n1,2,3\n"), FormatError);
  CHECK_THROWS_AS(io::parse_radii_csv("# 2,1,0.001,0.0001\n1,abc\n"), FormatError);
  CHECK_THROWS_AS(io::parse_radii_csv("# 2,1,0.001,0.0001\n1,-2\n"), FormatError);
}

TEST_CASE("echo file round trip") {
  const acoustics::EchoTrace e({0.0, 0.25, -1e-7, 3.5}, 50e6, -5e-8, "s001");
  const std::string text = io::echo_csv(e);
  CHECK(text.rfind("# fs=", 0) == 0);
  CHECK(text.find("session=s001") != std::string::npos);
  CHECK(io::parse_echo_csv(text) == e);
  CHECK_THROWS_AS(io::parse_echo_csv("t_s,p_pa\n0,1\n0.1,2\n"), FormatError);
  CHECK_THROWS_AS(io::parse_echo_csv("# fs=10 session=a\n0,1\n0.1,2\n"), FormatError);
  CHECK_THROWS_AS(io::parse_echo_csv("# fs=10 session=a\nt_s,p_pa\n0,1\n0.1\n"), FormatError);
  CHECK_THROWS_AS(io::parse_echo_csv("# rate=10\nt_s,p_pa\n0,1\n0.1,2\n"), FormatError);
  CHECK_THROWS_AS(io::echo_csv(acoustics::EchoTrace({1.0, 2.0}, 1.0, 0.0, "a b")),
                  FormatError);
}

TEST_CASE("waveform file") {
  const auto w = io::parse_waveform_csv("t_s,p_pa\n0,0\n0.5,100\n1,0\n");
  CHECK(w.times == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(w.values == std::vector<double>{0.0, 100.0, 0.0});
  CHECK_THROWS_AS(io::parse_waveform_csv("t_s,p_pa\n"), FormatError);
}

TEST_CASE("atomic writes") {
  TempDir dir("io");
  const auto p = dir / "a.txt";
  io::write_file_atomic(p, "one");
  io::write_file_atomic(p, "two");
  CHECK(io::read_file(p) == "two");
  CHECK(io::file_sha256(p) == io::sha256_hex("two"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir.path()))
    ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(io::read_file(dir / "absent"), FormatError);
}

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

TEST_CASE("config defaults") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.model().pulse_wave_speed() == doctest::Approx(5.0));
  CHECK(c.grid().nx() == 64);
  CHECK(c.solver_options().max_iter == 500);
  CHECK(c.solver_options().grad_tol == 1e-8);
  CHECK(c.horizon == 24);
  CHECK(c.step_seconds == 3600.0);
  CHECK(c.make_provider()->name() == "logistic");
  const auto keys = RunConfig::keys();
  CHECK(keys.size() > 60);
  CHECK(std::find(keys.begin(), keys.end(), "inversion.lambda") != keys.end());
}

TEST_CASE("config keys") {
  RunConfig c;
  c.set("inversion.lambda", "0.5");
  CHECK(c.lambda == 0.5);
  c.set("grid.nx", "32");
  CHECK(c.nx == 32);
  c.set("risk.weights", "1, 2, 3");
  CHECK(c.weights == std::vector<double>{1.0, 2.0, 3.0});
  c.set("run.seed", "18446744073709551615");
  CHECK(c.seed == 18446744073709551615ull);
  c.set("scenario.kind", "static-stenosis");
  CHECK(c.scenario().kind == synth::ScenarioKind::static_stenosis);

  CHECK_THROWS_AS(c.set("grid.nope", "1"), ConfigurationError);
  CHECK_THROWS_AS(c.set("lambda", "1"), ConfigurationError);
  CHECK_THROWS_AS(c.set("grid.nx", "many"), ConfigurationError);
  CHECK_THROWS_AS(c.set("grid.nx", "-3"), ConfigurationError);
  CHECK_THROWS_AS(c.set("inversion.max_iter", "1.5"), ConfigurationError);
}

TEST_CASE("config validation") {
  auto invalid = [](const char *key, const char *value) {
    RunConfig c;
    c.set(key, value);
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
  };
  invalid("grid.dt", "1e-3");          // CFL
  invalid("echo.fs", "1e6");           // below Nyquist
  invalid("inversion.solver", "magic");
  invalid("inversion.lambda", "-1");
  invalid("risk.provider", "oracle");
  invalid("risk.provider", "llm");     // needs an endpoint
  invalid("alert.critical_prob", "2");
  invalid("model.r0", "0");
  invalid("scenario.severity", "1");
  invalid("flow.boundary", "open");
  invalid("risk.horizon", "0");

  RunConfig ok;
  ok.set("risk.provider", "llm");
  ok.set("llm.endpoint", "http://127.0.0.1:9/score");
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.make_provider()->name() == "llm");
}

TEST_CASE("config files") {
  RunConfig c;
  load_config_text(c, "# comment\n[grid]\nnx = 48\n; other\n[inversion]\nlambda=0.01\n"
                      "[risk]\nweights = 1,2,3\n");
  CHECK(c.nx == 48);
  CHECK(c.lambda == 0.01);

  RunConfig d;
  CHECK_THROWS_AS(load_config_text(d, "[grid]\nnx = 48\nbogus = 1\n"), ConfigurationError);
  // nothing applied from a rejected file
  CHECK(d.nx == 64);
  CHECK_THROWS_AS(load_config_text(d, "nx = 48\n"), ConfigurationError);
  CHECK_THROWS_AS(load_config_text(d, "[grid\nnx = 48\n"), ConfigurationError);

  TempDir dir("cfg");
  std::ofstream(dir / "run.ini") << "[run]\nseed = 9\n";
  load_config_file(d, dir / "run.ini");
  CHECK(d.seed == 9);
  CHECK_THROWS_AS(load_config_file(d, dir / "missing.ini"), ConfigurationError);
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ConfigurationError("x")) == kExitInput);
  CHECK(exit_code_for(FormatError("x")) == kExitInput);
  CHECK(exit_code_for(SimulationError(3, "x")) == kExitSimulation);
  CHECK(exit_code_for(StabilityError("x")) == kExitSimulation);
  CHECK(exit_code_for(NumericalError("x")) == kExitNotConverged);
  CHECK(exit_code_for(ProviderTimeoutError("x")) == kExitProvider);
  CHECK(exit_code_for(risk::DispatchError("x", {})) == kExitProvider);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitInternal);
}

TEST_CASE("simulate, echo, invert, assess") {
  TempDir dir("cmd");
  RunConfig c = small_config(dir.path());
  c.bump_amplitude = -0.2;

  const auto sim = cmd_simulate(c);
  REQUIRE(sim.code == kExitOk);
  const auto radii = io::read_radii(dir / "radii.csv");
  CHECK(radii.nx() == 64);
  CHECK(radii.nt() == 400);
  const auto summary = read_json(dir / "flow_summary.json");
  CHECK(summary["nx"] == 64);
  CHECK(summary["min_radius"].get<double>() < 0.9 * c.r0);

  c.input = (dir / "radii.csv").string();
  REQUIRE(cmd_echo(c).code == kExitOk);
  const auto echo = io::read_echo(dir / "echo.csv");
  CHECK(echo.fs() == c.fs);

  c.input = (dir / "echo.csv").string();
  const auto inv = cmd_invert(c);
  REQUIRE(inv.code == kExitOk);
  const auto sol = read_json(dir / "solution.json");
  CHECK(sol["converged"] == true);
  const auto rec = sol["radii"].get<std::vector<double>>();
  const auto col = radii.column(radii.nt() - 1);
  CHECK(testsupport::l2(rec, std::vector<double>(col.begin(), col.end())) /
            testsupport::l2(std::vector<double>(col.begin(), col.end())) <
        0.01);

  c.input = (dir / "solution.json").string();
  REQUIRE(cmd_assess(c).code == kExitOk);
  const auto tte = read_json(dir / "tte.json");
  CHECK(tte["tte_step"].get<int>() >= 1);
  CHECK(tte["tie_rule"] == "smallest-index");
  const std::string curve = io::read_file(dir / "likelihood.csv");
  CHECK(curve.rfind("step,prob\n0,", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 1 + 1 + c.horizon);

  // a capped solver reports exit 4 but still writes its answer
  c.input = (dir / "echo.csv").string();
  c.max_iter = 1;
  fs::remove(dir / "solution.json");
  CHECK(cmd_invert(c).code == kExitNotConverged);
  CHECK(fs::exists(dir / "solution.json"));
}

TEST_CASE("bad configuration writes nothing") {
  TempDir dir("bad");
  RunConfig c = small_config(dir / "out");
  c.dt = 1.0; // CFL violation
  for (const char *name : {"simulate", "gen-data", "pipeline"}) {
    const auto r = run_command(name, c);
    CHECK(r.code == kExitInput);
    CHECK_FALSE(fs::exists(dir / "out"));
  }
  RunConfig d = small_config(dir / "out");
  d.input = (dir / "nope.csv").string();
  CHECK(run_command("echo", d).code == kExitInput);
  CHECK(run_command("invert", d).code == kExitInput);
  CHECK(run_command("assess", d).code == kExitInput);
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(run_command("dance", d).code == kExitInput);
}

TEST_CASE("simulation failure exits 3") {
  TempDir dir("sim");
  RunConfig c = small_config(dir / "out");
  c.inlet_amplitude = -1e9;
  CHECK(cmd_simulate(c).code == kExitSimulation);
  CHECK_FALSE(fs::exists(dir / "out" / "radii.csv"));
}

TEST_CASE("provider failure exits 5") {
  TempDir dir("prov");
  RunConfig c = small_config(dir.path());
  c.provider = "llm";
  c.endpoint = "http://127.0.0.1:1/score";
  c.max_retries = 0;
  c.timeout = 0.2;
  CHECK(cmd_pipeline(c).code == kExitProvider);
}

TEST_CASE("gen-data and pipeline outputs") {
  TempDir dir("pipe");
  RunConfig c = small_config(dir / "gen");
  REQUIRE(cmd_gen_data(c).code == kExitOk);
  CHECK(synth::read_dataset(dir / "gen").size() == 3);

  c.out = (dir / "run").string();
  const auto r = cmd_pipeline(c);
  REQUIRE(r.code == kExitOk);
  const auto manifest = read_json(dir / "run" / "manifest.json");
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["provider"] == "logistic");
  CHECK(manifest["solver"] == "gauss-descent");
  for (auto it = manifest["files"].begin(); it != manifest["files"].end(); ++it)
    CHECK(io::file_sha256(dir / "run" / it.key()) == it.value());
  CHECK(manifest["files"].contains("summary.json"));
  CHECK(manifest["files"].contains("sessions/s002/solution.json"));

  const auto summary = read_json(dir / "run" / "summary.json");
  REQUIRE(summary.size() == 3);
  for (const auto &s : summary) {
    CHECK(s["converged"] == true);
    CHECK(std::abs(s["stenosis_index"].get<double>() -
                   s["stenosis_index_true"].get<double>()) < 0.02);
    CHECK(std::abs(s["density_ratio_est"].get<double>() -
                   s["density_ratio_true"].get<double>()) < 1e-3);
  }
}
