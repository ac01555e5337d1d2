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

#include "vasosim/vasosim.h"

#include <new>
#include <string>

#include "vasosim/acoustics.hpp"
#include "vasosim/commands.hpp"
#include "vasosim/config.hpp"
#include "vasosim/errors.hpp"
#include "vasosim/hemogrid.hpp"
#include "vasosim/risk.hpp"

struct vasosim_config {
  vasosim::app::RunConfig config;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_message;

vasosim_status fail(vasosim_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class Fn> vasosim_status wrap(Fn &&fn) {
  last_error.clear();
  try {
    fn();
    return VASOSIM_OK;
  } catch (const std::bad_alloc &) {
    return fail(VASOSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(static_cast<vasosim_status>(vasosim::app::exit_code_for(e)), e.what());
  } catch (...) {
    return fail(VASOSIM_ERR_INTERNAL, "unknown error");
  }
}

vasosim_status run(const vasosim_config *config,
                   vasosim::app::CommandResult (*cmd)(const vasosim::app::RunConfig &)) {
  last_error.clear();
  last_message.clear();
  if (!config)
    return fail(VASOSIM_ERR_INPUT, "null config");
  const auto r = cmd(config->config);
  if (r.code == VASOSIM_OK)
    last_message = r.message;
  else
    last_error = r.message;
  return static_cast<vasosim_status>(r.code);
}

#define VASOSIM_REQUIRE(ptr)                                                   \
  do {                                                                         \
    if (!(ptr))                                                                \
      return fail(VASOSIM_ERR_INPUT, "null argument '" #ptr "'");              \
  } while (0)

} // namespace

extern "C" {

const char *vasosim_version(void) { return VASOSIM_VERSION; }

const char *vasosim_last_error(void) { return last_error.c_str(); }

const char *vasosim_last_message(void) { return last_message.c_str(); }

vasosim_status vasosim_config_create(vasosim_config **out) {
  VASOSIM_REQUIRE(out);
  return wrap([&] { *out = new vasosim_config{}; });
}

void vasosim_config_destroy(vasosim_config *config) { delete config; }

vasosim_status vasosim_config_load_file(vasosim_config *config, const char *path) {
  VASOSIM_REQUIRE(config);
  VASOSIM_REQUIRE(path);
  return wrap([&] { vasosim::app::load_config_file(config->config, path); });
}

vasosim_status vasosim_config_set(vasosim_config *config, const char *key,
                                  const char *value) {
  VASOSIM_REQUIRE(config);
  VASOSIM_REQUIRE(key);
  VASOSIM_REQUIRE(value);
  return wrap([&] { config->config.set(key, value); });
}

vasosim_status vasosim_config_validate(const vasosim_config *config) {
  VASOSIM_REQUIRE(config);
  return wrap([&] { config->config.validate(); });
}

size_t vasosim_config_key_count(void) {
  static const auto keys = vasosim::app::RunConfig::keys();
  return keys.size();
}

const char *vasosim_config_key(size_t index) {
  static const auto keys = vasosim::app::RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

vasosim_status vasosim_cmd_simulate(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_simulate);
}
vasosim_status vasosim_cmd_echo(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_echo);
}
vasosim_status vasosim_cmd_invert(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_invert);
}
vasosim_status vasosim_cmd_assess(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_assess);
}
vasosim_status vasosim_cmd_gen_data(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_gen_data);
}
vasosim_status vasosim_cmd_pipeline(const vasosim_config *config) {
  return run(config, vasosim::app::cmd_pipeline);
}

vasosim_status vasosim_area_from_radius(double radius, double *area) {
  VASOSIM_REQUIRE(area);
  return wrap([&] { *area = vasosim::hemo::area_from_radius(radius); });
}

vasosim_status vasosim_reflection_coefficient(double area_left, double area_right,
                                              double *gamma) {
  VASOSIM_REQUIRE(gamma);
  return wrap([&] {
    *gamma = vasosim::acoustics::reflection_coefficient(
        area_left, area_right, vasosim::hemo::ArteryModel::with_defaults());
  });
}

vasosim_status vasosim_wave_field(double omega, double amp_forward,
                                  double amp_reflected, double k_x, double k_r,
                                  double c, double x, double r, double t,
                                  double *re, double *im) {
  VASOSIM_REQUIRE(re);
  VASOSIM_REQUIRE(im);
  return wrap([&] {
    const vasosim::acoustics::PulseSpec p(omega, amp_forward, amp_reflected, k_x,
                                          k_r, c);
    const auto v = vasosim::acoustics::wave_field(p, x, r, t);
    *re = v.real();
    *im = v.imag();
  });
}

vasosim_status vasosim_estimate_tof(const double *incident, size_t incident_len,
                                    const double *echo, size_t echo_len, double fs,
                                    double min_peak, double *tof,
                                    double *peak_correlation) {
  VASOSIM_REQUIRE(incident);
  VASOSIM_REQUIRE(echo);
  VASOSIM_REQUIRE(tof);
  return wrap([&] {
    using vasosim::acoustics::EchoTrace;
    const EchoTrace a(std::vector<double>(incident, incident + incident_len), fs, 0.0);
    const EchoTrace b(std::vector<double>(echo, echo + echo_len), fs, 0.0);
    vasosim::acoustics::TofOptions opts;
    opts.min_peak = min_peak;
    const auto m = vasosim::acoustics::estimate_tof(a, b, opts);
    *tof = m.tof;
    if (peak_correlation)
      *peak_correlation = m.peak_correlation;
  });
}

vasosim_status vasosim_density_change(double tof_ref, double tof_new,
                                      int bulk_modulus_fixed, double *ratio) {
  VASOSIM_REQUIRE(ratio);
  return wrap([&] {
    vasosim::acoustics::ToFMeasurement a, b;
    a.tof = tof_ref;
    b.tof = tof_new;
    *ratio = vasosim::acoustics::density_change(a, b, bulk_modulus_fixed != 0).ratio;
  });
}

vasosim_status vasosim_compute_tte(const double *probs, size_t n,
                                   double step_seconds, int *tte_step,
                                   double *max_prob) {
  VASOSIM_REQUIRE(probs);
  VASOSIM_REQUIRE(tte_step);
  return wrap([&] {
    const auto r = vasosim::risk::compute_tte(std::span<const double>(probs, n),
                                              step_seconds);
    *tte_step = r.tte_step;
    if (max_prob)
      *max_prob = r.max_prob;
  });
}

} // extern "C"
