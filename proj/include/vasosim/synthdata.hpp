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

#ifndef VASOSIM_SYNTHDATA_HPP
#define VASOSIM_SYNTHDATA_HPP

/**
 * @file synthdata.hpp
 * @brief Seeded synthetic monitoring sessions with episode labels.
 *
 * Each session holds a true radii column, the echo it produces, a ranging
 * echo from a fixed reflector (for time of flight) and the episode label
 * V = [min_i r_i / r0 < threshold]. Session s draws its noise from its own
 * stream derived from (seed, s), so content never depends on generation
 * order.
 */

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vasosim/acoustics.hpp"
#include "vasosim/hemogrid.hpp"

namespace vasosim::synth {

enum class ScenarioKind { baseline, static_stenosis, progressive_occlusion };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string &s);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::baseline;
  double severity = 0.0;           ///< fractional radius loss at the centre
  std::size_t stenosis_center = 0; ///< cell index
  double stenosis_width = 4.0;     ///< full width at half depth, cells
  double noise_rms = 0.0;          ///< fraction of the noiseless echo RMS
  std::uint64_t seed = 0;
  std::size_t sessions = 1;
  hemo::Grid grid{64, 2000, 1e-3, 1e-4, 10.0};
  hemo::ArteryModel model = hemo::ArteryModel::with_defaults();
  acoustics::PulseSpec pulse =
      acoustics::PulseSpec::from_angle(2.0 * std::numbers::pi * 5e6,
                                       1540.0, 1.0, 0.0);
  double fs = 50e6;
  double n_cycles = 5.0;

  double occlusion_threshold = 0.6;
  int horizon = 24;
  /// Fractional density change reached at the last session (progressive
  /// occlusion only).
  double density_drift = 0.0;
  double ranging_path = 0.02;        ///< one-way path to the reference reflector [m]
  double ranging_reflectivity = 0.5;
  double inlet_amplitude = 400.0;    ///< Pa
  double inlet_frequency = 1.2;      ///< Hz
  double session_interval = 3600.0;  ///< s between sessions

  /// Throws DomainError.
  void validate() const;
};

nlohmann::json to_json(const ScenarioSpec &spec);

struct LabeledSession {
  std::vector<double> radii_truth;
  acoustics::EchoTrace echo;
  acoustics::EchoTrace ranging;
  double density_ratio = 1.0;
  int label_v = 0;
  std::vector<int> future_labels; ///< V at sessions s+1 .. s+horizon
  std::size_t session_index = 0;

  bool operator==(const LabeledSession &) const = default;
};

/// V for a radii column.
int episode_label(std::span<const double> radii, double r0, double threshold);

/// Stenosis depth (fraction of r0) of session s, extrapolated past the last
/// session for progressive occlusion and capped at 0.95.
double stenosis_depth(const ScenarioSpec &spec, double session);

/// Geometry-only radii column for a given depth.
std::vector<double> stenosis_profile(const ScenarioSpec &spec, double depth);

/// Flow run providing the physiological radius modulation.
hemo::FlowSolution scenario_flow(const ScenarioSpec &spec);

std::vector<LabeledSession> generate_scenario(const ScenarioSpec &spec);

std::string session_id(std::size_t index);

inline constexpr int kDatasetFormatVersion = 1;

/// Writes manifest.json plus per-session CSV files into `dir`. Returns the
/// manifest.
nlohmann::json write_dataset(const std::vector<LabeledSession> &sessions,
                             const ScenarioSpec &spec,
                             const std::filesystem::path &dir);

/// Throws CorruptionError on checksum mismatch, VersionError on an unknown
/// format version and FormatError on malformed content.
std::vector<LabeledSession> read_dataset(const std::filesystem::path &dir);

} // namespace vasosim::synth

#endif // VASOSIM_SYNTHDATA_HPP
