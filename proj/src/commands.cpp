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

#include "vasosim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "vasosim/errors.hpp"
#include "vasosim/io.hpp"

namespace vasosim::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class Fn> CommandResult guarded(Fn &&fn) {
  try {
    return fn();
  } catch (const std::exception &e) {
    return {exit_code_for(e), e.what()};
  }
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

/// Tracks files written under one output root, for the manifest.
class OutputDir {
public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {}

  const fs::path &root() const { return root_; }

  void write(const std::string &rel, const std::string &content) {
    io::write_file_atomic(root_ / rel, content);
    files_[rel] = io::sha256_hex(content);
  }

  void record(const std::string &rel) { files_[rel] = io::file_sha256(root_ / rel); }

  json checksums() const { return json(files_); }

private:
  fs::path root_;
  std::map<std::string, std::string> files_; // sorted by path
};

std::string require_input(const RunConfig &c, const char *what) {
  if (c.input.empty())
    throw ConfigurationError(std::string("missing input ") + what +
                             " (use --input or run.input)");
  if (!fs::is_regular_file(c.input))
    throw FormatError("input file " + c.input + " does not exist");
  return c.input;
}

std::vector<double> inlet_waveform(const RunConfig &c, const hemo::Grid &g) {
  std::string table = c.waveform;
  if (table.empty())
    table = c.input;
  if (!table.empty()) {
    const auto w = io::read_waveform(table);
    return hemo::resample_waveform(w.times, w.values, g.dt(), g.nt());
  }
  if (c.inlet_amplitude == 0.0)
    return {};
  std::vector<double> p(g.nt());
  const double w = 2.0 * std::numbers::pi * c.inlet_frequency;
  for (std::size_t j = 0; j < g.nt(); ++j)
    p[j] = c.inlet_amplitude * std::sin(w * static_cast<double>(j) * g.dt());
  return p;
}

std::optional<hemo::FlowState> initial_state(const RunConfig &c,
                                             const hemo::ArteryModel &m) {
  if (c.bump_amplitude == 0.0)
    return std::nullopt;
  const double centre =
      c.bump_center < 0 ? static_cast<double>(c.nx / 2) : static_cast<double>(c.bump_center);
  const double sigma = c.bump_width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  std::vector<double> r(c.nx);
  for (std::size_t i = 0; i < c.nx; ++i) {
    const double z = (static_cast<double>(i) - centre) / sigma;
    r[i] = m.r0 * (1.0 + c.bump_amplitude * std::exp(-0.5 * z * z));
  }
  return hemo::FlowState::from_radii(r, m);
}

std::string likelihood_csv(const risk::EpisodeLikelihood &l) {
  std::string out = "step,prob\n0," + io::format_double(l.prob_now) + "\n";
  for (std::size_t i = 0; i < l.probs.size(); ++i)
    out += std::to_string(i + 1) + "," + io::format_double(l.probs[i]) + "\n";
  return out;
}

std::unique_ptr<risk::AlertSink> make_sink(const RunConfig &c, const fs::path &root) {
  if (!c.webhook.empty())
    return std::make_unique<risk::WebhookSink>(c.webhook, c.webhook_timeout);
  return std::make_unique<risk::FileSink>(root / "alerts.jsonl");
}

struct Assessment {
  risk::EpisodeLikelihood curve;
  risk::TTEResult tte;
  risk::Severity severity = risk::Severity::info;
};

Assessment assess(const risk::BiophysicsReport &report,
                  const risk::LikelihoodProvider &provider, const RunConfig &c) {
  Assessment a;
  a.curve = risk::likelihood_curve(report, provider, c.horizon, c.step_seconds);
  a.tte = risk::compute_tte(a.curve, c.step_seconds);
  a.severity = c.policy().classify(a.tte, a.curve.prob_now);
  return a;
}

json tte_json(const Assessment &a, const std::string &provider) {
  json j = to_json(a.tte);
  j["prob_now"] = a.curve.prob_now;
  j["severity"] = risk::to_string(a.severity);
  j["provider"] = provider;
  return j;
}

bool dispatch(const Assessment &a, const risk::BiophysicsReport &report,
              const RunConfig &c, risk::AlertSink &sink) {
  risk::AlertContext ctx;
  ctx.session_id = report.session_id;
  ctx.timestamp = report.timestamp;
  ctx.recommendation = a.curve.recommendation;
  return risk::dispatch_alert(a.tte, a.curve.prob_now, c.policy(), sink, ctx).written;
}

} // namespace

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const SimulationError *>(&e) ||
      dynamic_cast<const StabilityError *>(&e))
    return kExitSimulation;
  if (dynamic_cast<const ProviderError *>(&e) ||
      dynamic_cast<const risk::DispatchError *>(&e))
    return kExitProvider;
  if (dynamic_cast<const NumericalError *>(&e))
    return kExitNotConverged;
  if (dynamic_cast<const Error *>(&e) ||
      dynamic_cast<const fs::filesystem_error *>(&e))
    return kExitInput;
  return kExitInternal;
}

json to_json(const inversion::InverseSolution &s) {
  return {{"radii", s.radii},
          {"residual_norm", s.residual_norm},
          {"objective_value", s.objective_value},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"gradient_norm_final", s.gradient_norm_final},
          {"stop_reason", s.stop_reason},
          {"objective_history", s.objective_history}};
}

// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    const auto model = c.model();
    const auto grid = c.grid();
    hemo::FlowForcing forcing;
    forcing.bc = c.boundary_kind();
    if (forcing.bc == hemo::Boundary::inlet_pressure)
      forcing.inlet = inlet_waveform(c, grid);
    const auto init = initial_state(c, model);

    const auto sol = hemo::solve_flow(model, grid, forcing, init);
    const double v0 = hemo::total_volume(sol.states.front(), grid);
    const double v1 = hemo::total_volume(sol.states.back(), grid);
    const auto &vals = sol.radii.values();
    const auto [rmin, rmax] = std::minmax_element(vals.begin(), vals.end());

    json summary = {{"nx", grid.nx()},
                    {"nt", grid.nt()},
                    {"boundary", c.boundary},
                    {"volume_initial", v0},
                    {"volume_final", v1},
                    {"volume_drift", std::abs(v1 - v0) / v0},
                    {"min_radius", *rmin},
                    {"max_radius", *rmax},
                    {"r0", model.r0}};
    OutputDir out(c.out);
    out.write("radii.csv", io::radii_csv(sol.radii));
    out.write("flow_summary.json", dump(summary));
    return {kExitOk, "volume drift " + io::format_double(summary["volume_drift"])};
  });
}

CommandResult cmd_echo(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    const auto field = io::read_radii(require_input(c, "radii file"));
    const std::size_t j =
        c.column < 0 ? field.nt() - 1 : static_cast<std::size_t>(c.column);
    if (j >= field.nt())
      throw ConfigurationError("echo.column " + std::to_string(j) +
                               " exceeds the " + std::to_string(field.nt()) +
                               " time levels in the radii file");
    const hemo::Grid grid(field.nx(), 1, field.grid().dx(), c.dt, 0.0);
    auto opts = c.echo_options();
    if (c.duration <= 0.0)
      opts.duration = acoustics::round_trip_duration(grid, c.c);
    const acoustics::EchoModel model(c.pulse(), grid, c.model(), opts);

    std::vector<double> samples;
    model.render(field.column(j), samples);
    if (c.noise_rms > 0.0) {
      double s2 = 0.0;
      for (double v : samples)
        s2 += v * v;
      const double sigma = c.noise_rms * std::sqrt(s2 / static_cast<double>(samples.size()));
      std::mt19937_64 rng(c.seed);
      std::normal_distribution<double> noise(0.0, sigma);
      if (sigma > 0.0)
        for (auto &v : samples)
          v += noise(rng);
    }
    const acoustics::EchoTrace trace(std::move(samples), opts.fs, model.t0(), "echo");

    OutputDir out(c.out);
    out.write("echo.csv", io::echo_csv(trace));
    return {kExitOk, std::to_string(trace.size()) + " samples"};
  });
}

CommandResult cmd_invert(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    auto observed = io::read_echo(require_input(c, "echo file"));
    auto problem = inversion::InverseProblem::make(std::move(observed), c.pulse(),
                                                   c.grid(), c.model(), c.lambda);
    problem.n_cycles = c.n_cycles;
    problem.validate();
    const auto solver = inversion::SolverRegistry::global().find(c.solver);
    const auto sol = solver->solve(problem, c.solver_options());

    json j = to_json(sol);
    j["solver"] = c.solver;
    OutputDir out(c.out);
    out.write("solution.json", dump(j));
    if (!sol.converged)
      return {kExitNotConverged, "not converged after " +
                                     std::to_string(sol.iterations) +
                                     " iterations (" + sol.stop_reason + ")"};
    return {kExitOk, "converged in " + std::to_string(sol.iterations) +
                         " iterations (" + sol.stop_reason + ")"};
  });
}

CommandResult cmd_assess(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    const auto text = io::read_file(require_input(c, "report or solution file"));
    const json in = json::parse(text, nullptr, false);
    if (in.is_discarded() || !in.is_object())
      throw FormatError("assess input is not a JSON object");

    risk::BiophysicsReport report;
    if (in.contains("radii")) {
      try {
        const auto radii = in.at("radii").get<std::vector<double>>();
        report.stenosis_index = risk::stenosis_index(radii, c.r0);
        report.provenance.residual_norm = in.value("residual_norm", 0.0);
        report.provenance.converged = in.value("converged", true);
        report.session_id = "assess";
      } catch (const json::exception &e) {
        throw FormatError(std::string("solution file: ") + e.what());
      }
      report.validate();
    } else {
      report = risk::report_from_json(in);
    }

    const auto provider = c.make_provider();
    const auto a = assess(report, *provider, c);

    OutputDir out(c.out);
    out.write("likelihood.csv", likelihood_csv(a.curve));
    out.write("tte.json", dump(tte_json(a, provider->name())));
    const auto sink = make_sink(c, out.root());
    const bool written = dispatch(a, report, c, *sink);
    return {kExitOk, "tte step " + std::to_string(a.tte.tte_step) + ", " +
                         risk::to_string(a.severity) +
                         (written ? " alert dispatched" : "")};
  });
}

CommandResult cmd_gen_data(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    const auto spec = c.scenario();
    spec.validate();
    const auto sessions = synth::generate_scenario(spec);
    synth::write_dataset(sessions, spec, c.out);
    return {kExitOk, std::to_string(sessions.size()) + " sessions"};
  });
}

CommandResult cmd_pipeline(const RunConfig &c) {
  return guarded([&]() -> CommandResult {
    c.validate();
    const auto spec = c.scenario();
    spec.validate();
    const auto provider = c.make_provider();
    const auto solver = inversion::SolverRegistry::global().find(c.solver);
    const auto solver_opts = c.solver_options();

    const auto sessions = synth::generate_scenario(spec);

    acoustics::EchoOptions ranging_opts;
    ranging_opts.fs = spec.fs;
    ranging_opts.n_cycles = spec.n_cycles;
    const auto incident =
        acoustics::ranging_incident(spec.pulse, spec.ranging_path, ranging_opts);
    acoustics::TofOptions tof_opts;
    tof_opts.min_peak = c.min_peak;
    std::vector<acoustics::ToFMeasurement> tofs;
    for (const auto &s : sessions)
      tofs.push_back(acoustics::estimate_tof(incident, s.ranging, tof_opts));

    OutputDir out(c.out);
    const auto dataset = synth::write_dataset(sessions, spec, out.root() / "dataset");
    out.record("dataset/manifest.json");
    for (const auto &entry : dataset["sessions"])
      for (const auto &[kind, name] : entry["files"].items())
        out.record("dataset/" + name.get<std::string>());

    const auto sink = make_sink(c, out.root());
    json summary = json::array();
    bool all_converged = true;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
      const auto &s = sessions[k];
      const auto density = acoustics::density_change(tofs.front(), tofs[k]);
      // path is fixed, so the ranging delay gives this session's sound speed
      const double c_est = 2.0 * spec.ranging_path / tofs[k].tof;

      auto problem = inversion::InverseProblem::make(
          s.echo, spec.pulse.with_speed(c_est), spec.grid, spec.model, c.lambda);
      problem.n_cycles = spec.n_cycles;
      const auto sol = solver->solve(problem, solver_opts);
      all_converged = all_converged && sol.converged;

      risk::BiophysicsReport report;
      report.stenosis_index = risk::stenosis_index(sol.radii, spec.model.r0);
      report.density_fractional_change = density.fractional_change;
      report.tof = tofs[k].tof;
      report.timestamp = static_cast<double>(s.session_index) * spec.session_interval;
      report.session_id = synth::session_id(s.session_index);
      report.provenance = {sol.residual_norm, sol.converged};

      const auto a = assess(report, *provider, c);
      const bool written = dispatch(a, report, c, *sink);

      const std::string dir = "sessions/" + report.session_id + "/";
      json sj = to_json(sol);
      sj["solver"] = c.solver;
      out.write(dir + "solution.json", dump(sj));
      out.write(dir + "report.json", dump(risk::to_json(report)));
      out.write(dir + "likelihood.csv", likelihood_csv(a.curve));
      out.write(dir + "tte.json", dump(tte_json(a, provider->name())));

      summary.push_back({{"session_id", report.session_id},
                         {"label_v", s.label_v},
                         {"density_ratio_true", s.density_ratio},
                         {"density_ratio_est", density.ratio},
                         {"stenosis_index_true",
                          risk::stenosis_index(s.radii_truth, spec.model.r0)},
                         {"stenosis_index", report.stenosis_index},
                         {"converged", sol.converged},
                         {"prob_now", a.curve.prob_now},
                         {"tte_step", a.tte.tte_step},
                         {"max_prob", a.tte.max_prob},
                         {"severity", risk::to_string(a.severity)},
                         {"alert_written", written}});
    }
    out.write("summary.json", dump(summary));
    if (c.webhook.empty() && fs::exists(out.root() / "alerts.jsonl"))
      out.record("alerts.jsonl");

    json manifest = {{"format_version", synth::kDatasetFormatVersion},
                     {"seed", c.seed},
                     {"provider", provider->name()},
                     {"solver", c.solver},
                     {"files", out.checksums()}};
    io::write_file_atomic(out.root() / "manifest.json", dump(manifest));

    if (!all_converged)
      return {kExitNotConverged, "at least one session did not converge"};
    return {kExitOk, std::to_string(sessions.size()) + " sessions assessed"};
  });
}

CommandResult run_command(const std::string &name, const RunConfig &config) {
  static const std::map<std::string, std::function<CommandResult(const RunConfig &)>>
      table = {{"simulate", cmd_simulate}, {"echo", cmd_echo},
               {"invert", cmd_invert},     {"assess", cmd_assess},
               {"gen-data", cmd_gen_data}, {"pipeline", cmd_pipeline}};
  const auto it = table.find(name);
  if (it == table.end())
    return {kExitInput, "unknown command '" + name + "'"};
  return it->second(config);
}

} // namespace vasosim::app
