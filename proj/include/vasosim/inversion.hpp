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

#ifndef VASOSIM_INVERSION_HPP
#define VASOSIM_INVERSION_HPP

/**
 * @file inversion.hpp
 * @brief Radii recovery from a single echo by regularised least squares.
 *
 * The objective for a radii column r is
 *
 *     J(r) = 1/2 sum_n ((F(r)_n - y_n) / A)^2
 *          + lambda sum_i ((L (r - r_prior))_i / r0)^2
 *
 * where F is the echo forward model, y the observation, A the incident
 * amplitude and L the nx x nx second-difference operator, taking r - r_prior
 * as zero just outside both ends of the segment. L is nonsingular, so a
 * large lambda pins the solution to the prior. Both terms are dimensionless,
 * so lambda weighs smoothness against data misfit directly.
 */

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "vasosim/acoustics.hpp"
#include "vasosim/hemogrid.hpp"

namespace vasosim::inversion {

struct Bounds {
  double r_min = 0.0;
  double r_max = 0.0;
};

struct InverseProblem {
  acoustics::EchoTrace observed;
  acoustics::PulseSpec pulse;
  hemo::Grid grid;
  hemo::ArteryModel model;
  double lambda = 1e-4;
  std::vector<double> prior; ///< empty means r0 everywhere
  Bounds bounds;
  double n_cycles = 5.0;

  /// Bounds [0.05 r0, 2 r0] and a constant prior.
  static InverseProblem make(acoustics::EchoTrace observed,
                             acoustics::PulseSpec pulse, hemo::Grid grid,
                             hemo::ArteryModel model, double lambda = 1e-4);

  /// Throws DomainError on lambda < 0, bad bounds or an out-of-bounds prior.
  void validate() const;

  std::vector<double> prior_or_default() const;
};

struct LineSearchOptions {
  double shrink = 0.5;       ///< step reduction per backtrack
  double sufficient = 1e-4;  ///< Armijo constant
  std::size_t max_backtracks = 60;
};

struct SolverOptions {
  std::size_t max_iter = 500;
  /// Stop when the projected gradient norm falls below grad_tol times its
  /// initial value.
  double grad_tol = 1e-8;
  /// Stop when the largest relative radius update falls below step_tol.
  double step_tol = 1e-10;
  /// Objective values at or below this are treated as an exact fit.
  double objective_tol = 1e-20;
  double fd_step = 1e-6; ///< relative finite-difference step
  LineSearchOptions line_search;
  /// Precondition with a model Hessian in the interface log-area ratios
  /// (data term) plus the exact smoothing term, instead of stepping along the
  /// raw radius gradient.
  bool interface_metric = true;
  std::optional<std::vector<double>> initial; ///< defaults to the prior

  void validate() const;
};

struct InverseSolution {
  std::vector<double> radii;
  double residual_norm = 0.0; ///< ||F(r) - y||_2 [Pa]
  double objective_value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm_final = 0.0; ///< projected, in units of r0
  std::string stop_reason;
  std::vector<double> objective_history; ///< accepted iterates, first = initial

  bool operator==(const InverseSolution &) const = default;
};

/// Cached evaluator of J for one problem. Pure apart from scratch buffers;
/// use one instance per thread.
class Objective {
public:
  explicit Objective(const InverseProblem &problem);

  double operator()(std::span<const double> radii) const;

  /// ||F(r) - y||_2 in Pa.
  double residual_norm(std::span<const double> radii) const;

  const InverseProblem &problem() const noexcept { return problem_; }
  const acoustics::EchoModel &echo_model() const noexcept { return echo_; }
  std::span<const double> prior() const noexcept { return prior_; }

private:
  void check_bounds(std::span<const double> radii) const;

  InverseProblem problem_;
  acoustics::EchoModel echo_;
  std::vector<double> prior_;
  mutable std::vector<double> scratch_;
};

double objective(std::span<const double> radii, const InverseProblem &problem);

/// Forward-difference gradient dJ/dr [1/m] with relative step fd_step.
std::vector<double> gradient(std::span<const double> radii,
                             const InverseProblem &problem,
                             const SolverOptions &options);
std::vector<double> gradient(std::span<const double> radii,
                             const Objective &objective, double fd_step);

/// Central-difference reference gradient.
std::vector<double> gradient_central(std::span<const double> radii,
                                     const Objective &objective,
                                     double fd_step);

/// L^T L v for the second-difference operator.
std::vector<double> apply_smoothing_normal(std::span<const double> v);

/// Interface every radii solver implements.
class InverseSolver {
public:
  virtual ~InverseSolver() = default;
  virtual std::string name() const = 0;
  virtual InverseSolution solve(const InverseProblem &problem,
                                const SolverOptions &options) const = 0;
};

/// Projected gradient descent with backtracking. Trial steps use the
/// Barzilai-Borwein length; acceptance is monotone Armijo along the
/// projected path.
class GaussDescentSolver final : public InverseSolver {
public:
  std::string name() const override { return "gauss-descent"; }
  InverseSolution solve(const InverseProblem &problem,
                        const SolverOptions &options) const override;
};

InverseSolution invert_radii(const InverseProblem &problem,
                             const SolverOptions &options);

/// Name -> solver table. Lookups may run concurrently with each other and
/// with registration.
class SolverRegistry {
public:
  using Handle = std::shared_ptr<const InverseSolver>;

  /// Throws RegistrationError on a duplicate or empty name.
  Handle add(const std::string &name, Handle solver);

  /// Throws NotFoundError.
  Handle find(const std::string &name) const;

  bool contains(const std::string &name) const;
  std::vector<std::string> names() const;

  /// Process-wide registry, pre-populated with "gauss-descent".
  static SolverRegistry &global();

private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, Handle> solvers_;
};

/// Result of running a solver through the interface checks.
struct ConformanceReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Checks radii count, bound feasibility, iteration budget and bitwise
/// determinism over two runs.
ConformanceReport check_conformance(const InverseSolver &solver,
                                    const InverseProblem &problem,
                                    const SolverOptions &options);

} // namespace vasosim::inversion

#endif // VASOSIM_INVERSION_HPP
