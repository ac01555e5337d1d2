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

#include "vasosim/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "vasosim/errors.hpp"
#include "vasosim/io.hpp"

namespace vasosim::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 session_stream(std::uint64_t seed, std::size_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

double rms(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<double> add_noise(const std::vector<double> &clean, double level,
                              std::mt19937_64 &rng) {
  std::vector<double> out = clean;
  const double sigma = level * rms(clean);
  if (sigma == 0.0)
    return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto &v : out)
    v += noise(rng);
  return out;
}

double progress(const ScenarioSpec &spec, double session) {
  if (spec.sessions <= 1)
    return 1.0;
  return session / static_cast<double>(spec.sessions - 1);
}

} // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
  case ScenarioKind::baseline:
    return "baseline";
  case ScenarioKind::static_stenosis:
    return "static-stenosis";
  case ScenarioKind::progressive_occlusion:
    return "progressive-occlusion";
  }
  return "baseline";
}

ScenarioKind scenario_kind_from_string(const std::string &s) {
  if (s == "baseline")
    return ScenarioKind::baseline;
  if (s == "static-stenosis")
    return ScenarioKind::static_stenosis;
  if (s == "progressive-occlusion")
    return ScenarioKind::progressive_occlusion;
  throw DomainError("unknown scenario kind '" + s + "'");
}

void ScenarioSpec::validate() const {
  model.validate();
  if (!(severity >= 0.0 && severity < 1.0))
    throw DomainError("scenario severity must lie in [0, 1)");
  if (sessions < 1)
    throw DomainError("scenario needs at least one session");
  if (!(noise_rms >= 0.0) || !std::isfinite(noise_rms))
    throw DomainError("noise level must be non-negative");
  if (!(occlusion_threshold > 0.0 && occlusion_threshold <= 1.0))
    throw DomainError("occlusion threshold must lie in (0, 1]");
  if (horizon < 0)
    throw DomainError("label horizon must be non-negative");
  if (!(density_drift > -1.0) || !std::isfinite(density_drift))
    throw DomainError("density drift must exceed -1");
  if (!(ranging_path > 0.0) || !(ranging_reflectivity > 0.0) ||
      !(ranging_reflectivity <= 1.0))
    throw DomainError("ranging path must be positive and reflectivity in "
                      "(0, 1]");
  if (!(session_interval > 0.0))
    throw DomainError("session interval must be positive");
  if (kind != ScenarioKind::baseline) {
    if (!(stenosis_width > 0.0))
      throw DomainError("stenosis width must be positive");
    const double c = static_cast<double>(stenosis_center);
    if (c - stenosis_width < 0.0 ||
        c + stenosis_width > static_cast<double>(grid.nx() - 1))
      throw DomainError("stenosis centre " + std::to_string(stenosis_center) +
                        " with width " + std::to_string(stenosis_width) +
                        " does not fit in " + std::to_string(grid.nx()) +
                        " cells");
  }
}

nlohmann::json to_json(const ScenarioSpec &s) {
  return {{"kind", to_string(s.kind)},
          {"severity", s.severity},
          {"stenosis_center", s.stenosis_center},
          {"stenosis_width", s.stenosis_width},
          {"noise_rms", s.noise_rms},
          {"seed", s.seed},
          {"sessions", s.sessions},
          {"grid",
           {{"nx", s.grid.nx()},
            {"nt", s.grid.nt()},
            {"dx", s.grid.dx()},
            {"dt", s.grid.dt()},
            {"max_speed", s.grid.max_speed()}}},
          {"model",
           {{"r0", s.model.r0},
            {"beta", s.model.beta},
            {"p_ext", s.model.p_ext},
            {"rho", s.model.rho},
            {"mu", s.model.mu},
            {"alpha", s.model.alpha},
            {"re", s.model.re},
            {"c0", s.model.c0}}},
          {"pulse",
           {{"omega", s.pulse.omega()},
            {"amp_forward", s.pulse.amp_forward()},
            {"amp_reflected", s.pulse.amp_reflected()},
            {"k_x", s.pulse.k_x()},
            {"k_r", s.pulse.k_r()},
            {"c", s.pulse.c()}}},
          {"fs", s.fs},
          {"n_cycles", s.n_cycles},
          {"occlusion_threshold", s.occlusion_threshold},
          {"horizon", s.horizon},
          {"density_drift", s.density_drift},
          {"ranging_path", s.ranging_path},
          {"ranging_reflectivity", s.ranging_reflectivity},
          {"inlet_amplitude", s.inlet_amplitude},
          {"inlet_frequency", s.inlet_frequency},
          {"session_interval", s.session_interval}};
}

int episode_label(std::span<const double> radii, double r0, double threshold) {
  if (radii.empty())
    throw DomainError("episode label needs a radii column");
  const double rmin = *std::min_element(radii.begin(), radii.end());
  return rmin / r0 < threshold ? 1 : 0;
}

double stenosis_depth(const ScenarioSpec &spec, double session) {
  switch (spec.kind) {
  case ScenarioKind::baseline:
    return 0.0;
  case ScenarioKind::static_stenosis:
    return spec.severity;
  case ScenarioKind::progressive_occlusion:
    return std::min(0.95, spec.severity * progress(spec, session));
  }
  return 0.0;
}

std::vector<double> stenosis_profile(const ScenarioSpec &spec, double depth) {
  const std::size_t nx = spec.grid.nx();
  std::vector<double> r(nx, spec.model.r0);
  if (depth == 0.0)
    return r;
  const double sigma = spec.stenosis_width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double c = static_cast<double>(spec.stenosis_center);
  for (std::size_t i = 0; i < nx; ++i) {
    const double z = (static_cast<double>(i) - c) / sigma;
    r[i] = spec.model.r0 * (1.0 - depth * std::exp(-0.5 * z * z));
  }
  return r;
}

hemo::FlowSolution scenario_flow(const ScenarioSpec &spec) {
  hemo::FlowForcing forcing;
  forcing.bc = hemo::Boundary::inlet_pressure;
  forcing.inlet.resize(spec.grid.nt());
  const double w = 2.0 * std::numbers::pi * spec.inlet_frequency;
  for (std::size_t j = 0; j < spec.grid.nt(); ++j)
    forcing.inlet[j] =
        spec.inlet_amplitude * std::sin(w * static_cast<double>(j) * spec.grid.dt());
  return hemo::solve_flow(spec.model, spec.grid, forcing);
}

std::string session_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%03zu", index);
  return buf;
}

std::vector<LabeledSession> generate_scenario(const ScenarioSpec &spec) {
  spec.validate();
  const auto flow = scenario_flow(spec);
  const std::size_t nt = spec.grid.nt();
  const double r0 = spec.model.r0;
  const double c_ref = spec.pulse.c();

  std::vector<LabeledSession> out;
  out.reserve(spec.sessions);
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    const double depth = stenosis_depth(spec, static_cast<double>(s));
    auto radii = stenosis_profile(spec, depth);

    // physiological modulation from the flow run
    const std::size_t j =
        spec.sessions == 1 ? nt - 1 : s * (nt - 1) / (spec.sessions - 1);
    const auto column = flow.radii.column(j);
    for (std::size_t i = 0; i < radii.size(); ++i)
      radii[i] *= column[i] / r0;

    double density_ratio = 1.0;
    if (spec.kind == ScenarioKind::progressive_occlusion)
      density_ratio = 1.0 + spec.density_drift * progress(spec, static_cast<double>(s));
    // fixed bulk modulus: c scales with rho^-1/2
    const auto pulse = spec.pulse.with_speed(c_ref / std::sqrt(density_ratio));

    acoustics::EchoOptions eopts;
    eopts.fs = spec.fs;
    eopts.n_cycles = spec.n_cycles;
    eopts.duration = acoustics::round_trip_duration(spec.grid, pulse.c());

    const std::string id = session_id(s);
    auto rng = session_stream(spec.seed, s);

    const acoustics::EchoModel echo_model(pulse, spec.grid, spec.model, eopts);
    std::vector<double> clean;
    echo_model.render(radii, clean);
    auto echo = acoustics::EchoTrace(add_noise(clean, spec.noise_rms, rng),
                                     spec.fs, echo_model.t0(), id);

    const auto ranging_clean = acoustics::ranging_echo(
        pulse, spec.ranging_path, spec.ranging_reflectivity, eopts, id);
    auto ranging = acoustics::EchoTrace(
        add_noise(ranging_clean.samples(), spec.noise_rms, rng), spec.fs,
        ranging_clean.t0(), id);

    LabeledSession ls{std::move(radii), std::move(echo), std::move(ranging),
                      density_ratio,    0,               {},
                      s};
    ls.label_v = episode_label(ls.radii_truth, r0, spec.occlusion_threshold);
    for (int h = 1; h <= spec.horizon; ++h) {
      const auto future = stenosis_profile(
          spec, stenosis_depth(spec, static_cast<double>(s) + h));
      ls.future_labels.push_back(
          episode_label(future, r0, spec.occlusion_threshold));
    }
    out.push_back(std::move(ls));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

nlohmann::json write_dataset(const std::vector<LabeledSession> &sessions,
                             const ScenarioSpec &spec,
                             const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["seed"] = spec.seed;
  manifest["spec"] = to_json(spec);
  manifest["sessions"] = nlohmann::json::array();

  for (const auto &s : sessions) {
    const std::string id = session_id(s.session_index);
    const hemo::RadiiField column(
        hemo::Grid(s.radii_truth.size(), 1, spec.grid.dx(), spec.grid.dt(), 0.0),
        s.radii_truth);
    const std::string files[3][2] = {
        {"radii", id + "_radii.csv"},
        {"echo", id + "_echo.csv"},
        {"ranging", id + "_ranging.csv"}};
    const std::string content[3] = {io::radii_csv(column), io::echo_csv(s.echo),
                                    io::echo_csv(s.ranging)};
    nlohmann::json entry;
    entry["index"] = s.session_index;
    entry["label_v"] = s.label_v;
    entry["future_labels"] = s.future_labels;
    entry["density_ratio"] = s.density_ratio;
    for (int k = 0; k < 3; ++k) {
      io::write_file_atomic(dir / files[k][1], content[k]);
      entry["files"][files[k][0]] = files[k][1];
      entry["checksums"][files[k][0]] = io::sha256_hex(content[k]);
    }
    manifest["sessions"].push_back(entry);
  }
  io::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

std::vector<LabeledSession> read_dataset(const std::filesystem::path &dir) {
  const auto text = io::read_file(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(text, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object())
    throw FormatError("dataset manifest is not valid JSON");
  if (!manifest.contains("format_version") ||
      !manifest["format_version"].is_number_integer())
    throw FormatError("dataset manifest lacks format_version");
  const int version = manifest["format_version"].get<int>();
  if (version != kDatasetFormatVersion)
    throw VersionError("dataset format version " + std::to_string(version) +
                       " is not supported (expected " +
                       std::to_string(kDatasetFormatVersion) + ")");

  std::vector<LabeledSession> out;
  try {
    for (const auto &entry : manifest.at("sessions")) {
      auto load = [&](const char *kind) {
        const auto name = entry.at("files").at(kind).get<std::string>();
        const auto content = io::read_file(dir / name);
        if (io::sha256_hex(content) !=
            entry.at("checksums").at(kind).get<std::string>())
          throw CorruptionError("checksum mismatch for " + name);
        return content;
      };
      const auto radii = io::parse_radii_csv(load("radii"));
      const auto col = radii.column(0);
      LabeledSession s{std::vector<double>(col.begin(), col.end()),
                       io::parse_echo_csv(load("echo")),
                       io::parse_echo_csv(load("ranging")),
                       entry.at("density_ratio").get<double>(),
                       entry.at("label_v").get<int>(),
                       entry.at("future_labels").get<std::vector<int>>(),
                       entry.at("index").get<std::size_t>()};
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("dataset manifest: ") + e.what());
  }
  return out;
}

} // namespace vasosim::synth
