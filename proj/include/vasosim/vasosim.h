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

#ifndef VASOSIM_H
#define VASOSIM_H

/*
 * C interface to libvasosim.
 *
 * Every function returns a vasosim_status. On failure a description is kept
 * per thread and can be read with vasosim_last_error() until the next call
 * on that thread. Status values double as the CLI exit codes.
 */

#include <stddef.h>

#if defined(_WIN32)
#if defined(VASOSIM_BUILDING_LIBRARY)
#define VASOSIM_API __declspec(dllexport)
#else
#define VASOSIM_API __declspec(dllimport)
#endif
#else
#define VASOSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vasosim_status {
  VASOSIM_OK = 0,
  VASOSIM_ERR_INTERNAL = 1,
  VASOSIM_ERR_INPUT = 2,          /* bad argument, config or file */
  VASOSIM_ERR_SIMULATION = 3,
  VASOSIM_ERR_NOT_CONVERGED = 4,
  VASOSIM_ERR_PROVIDER = 5
} vasosim_status;

/* Opaque run configuration. */
typedef struct vasosim_config vasosim_config;

VASOSIM_API const char *vasosim_version(void);

/* Message of the last failed call on this thread; "" when none. */
VASOSIM_API const char *vasosim_last_error(void);

VASOSIM_API vasosim_status vasosim_config_create(vasosim_config **out);
VASOSIM_API void vasosim_config_destroy(vasosim_config *config);

/* Applies an INI file on top of the current values. */
VASOSIM_API vasosim_status vasosim_config_load_file(vasosim_config *config,
                                                    const char *path);

/* Sets one "section.key" from text, e.g. ("grid.nx", "128"). */
VASOSIM_API vasosim_status vasosim_config_set(vasosim_config *config,
                                              const char *key,
                                              const char *value);

VASOSIM_API vasosim_status vasosim_config_validate(const vasosim_config *config);

/* Number of accepted keys, and the i-th key name (sorted). */
VASOSIM_API size_t vasosim_config_key_count(void);
VASOSIM_API const char *vasosim_config_key(size_t index);

/* Commands. Outputs go to run.out; see the README for file layouts. */
VASOSIM_API vasosim_status vasosim_cmd_simulate(const vasosim_config *config);
VASOSIM_API vasosim_status vasosim_cmd_echo(const vasosim_config *config);
VASOSIM_API vasosim_status vasosim_cmd_invert(const vasosim_config *config);
VASOSIM_API vasosim_status vasosim_cmd_assess(const vasosim_config *config);
VASOSIM_API vasosim_status vasosim_cmd_gen_data(const vasosim_config *config);
VASOSIM_API vasosim_status vasosim_cmd_pipeline(const vasosim_config *config);

/* Summary line of the last successful command on this thread. */
VASOSIM_API const char *vasosim_last_message(void);

/* Numerics. */
VASOSIM_API vasosim_status vasosim_area_from_radius(double radius, double *area);

VASOSIM_API vasosim_status vasosim_reflection_coefficient(double area_left,
                                                          double area_right,
                                                          double *gamma);

VASOSIM_API vasosim_status vasosim_wave_field(double omega, double amp_forward,
                                              double amp_reflected, double k_x,
                                              double k_r, double c, double x,
                                              double r, double t, double *re,
                                              double *im);

/* Both traces share fs and start at t = 0. */
VASOSIM_API vasosim_status vasosim_estimate_tof(const double *incident,
                                                size_t incident_len,
                                                const double *echo,
                                                size_t echo_len, double fs,
                                                double min_peak, double *tof,
                                                double *peak_correlation);

VASOSIM_API vasosim_status vasosim_density_change(double tof_ref, double tof_new,
                                                  int bulk_modulus_fixed,
                                                  double *ratio);

/* 1-based first argmax of probs[0..n). */
VASOSIM_API vasosim_status vasosim_compute_tte(const double *probs, size_t n,
                                               double step_seconds,
                                               int *tte_step, double *max_prob);

#ifdef __cplusplus
}
#endif

#endif /* VASOSIM_H */
