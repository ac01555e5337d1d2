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

#include "vasosim/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "vasosim/errors.hpp"

namespace vasosim::inversion {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

acoustics::EchoOptions options_for(const InverseProblem &p) {
  acoustics::EchoOptions o;
  o.fs = p.observed.fs();
  o.n_cycles = p.n_cycles;
  const double pulse_len = p.n_cycles * p.pulse.period();
  const double observed_end =
      p.observed.time(p.observed.size() - 1) - 0.5 * pulse_len;
  o.duration = std::max(acoustics::round_trip_duration(p.grid, p.pulse.c()),
                        observed_end);
  return o;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Problem / options
// ---------------------------------------------------------------------------

InverseProblem InverseProblem::make(acoustics::EchoTrace observed,
                                    acoustics::PulseSpec pulse, hemo::Grid grid,
                                    hemo::ArteryModel model, double lambda) {
  const double r0 = model.r0;
  return InverseProblem{std::move(observed), pulse, grid, model, lambda,
                        {},                  Bounds{0.05 * r0, 2.0 * r0}};
}

void InverseProblem::validate() const {
  model.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw DomainError("regularisation weight must be non-negative");
  if (!positive_finite(bounds.r_min) || !(bounds.r_max > bounds.r_min) ||
      !std::isfinite(bounds.r_max))
    throw DomainError("radius bounds need 0 < r_min < r_max");
  if (pulse.amp_forward() == 0.0)
    throw DomainError("inversion needs a non-zero incident amplitude");
  if (!prior.empty() && prior.size() != grid.nx())
    throw DomainError("prior has " + std::to_string(prior.size()) +
                      " cells, grid has " + std::to_string(grid.nx()));
  for (double r : prior_or_default())
    if (!(r >= bounds.r_min && r <= bounds.r_max))
      throw DomainError("prior lies outside the radius bounds");
}

std::vector<double> InverseProblem::prior_or_default() const {
  if (!prior.empty())
    return prior;
  return std::vector<double>(grid.nx(), model.r0);
}

void SolverOptions::validate() const {
  if (max_iter < 1)
    throw DomainError("solver needs max_iter >= 1");
  if (!positive_finite(grad_tol) || !positive_finite(step_tol) ||
      !positive_finite(fd_step) || !(objective_tol >= 0.0))
    throw DomainError("solver tolerances must be positive");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
    throw DomainError("line search shrink factor must lie in (0, 1)");
  if (!(line_search.sufficient > 0.0 && line_search.sufficient < 1.0))
    throw DomainError("line search sufficient-decrease constant must lie in "
                      "(0, 1)");
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

Objective::Objective(const InverseProblem &problem)
    : problem_(problem),
      echo_(problem.pulse, problem.grid, problem.model, options_for(problem)),
      prior_(problem.prior_or_default()) {
  problem_.validate();
  const double shift = (problem_.observed.t0() - echo_.t0()) * echo_.fs();
  if (std::abs(shift - std::round(shift)) > 1e-6)
    throw DomainError("observed trace is not sampled on the echo time grid");
}

void Objective::check_bounds(std::span<const double> radii) const {
  if (radii.size() != problem_.grid.nx())
    throw DomainError("radii column has " + std::to_string(radii.size()) +
                      " cells, grid has " + std::to_string(problem_.grid.nx()));
  for (double r : radii)
    if (!(r >= problem_.bounds.r_min && r <= problem_.bounds.r_max))
      throw DomainError("radius " + std::to_string(r) +
                        " m outside the bounds");
}

double Objective::residual_norm(std::span<const double> radii) const {
  check_bounds(radii);
  echo_.render(radii, scratch_);
  const auto &y = problem_.observed.samples();
  const auto shift = static_cast<long long>(
      std::llround((problem_.observed.t0() - echo_.t0()) * echo_.fs()));
  const auto model_size = static_cast<long long>(scratch_.size());
  double s = 0.0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    const long long m = static_cast<long long>(n) + shift;
    const double f = (m >= 0 && m < model_size) ? scratch_[m] : 0.0;
    const double d = f - y[n];
    s += d * d;
  }
  return std::sqrt(s);
}

double Objective::operator()(std::span<const double> radii) const {
  const double amp = problem_.pulse.amp_forward();
  const double res = residual_norm(radii) / amp;
  double value = 0.5 * res * res;
  if (problem_.lambda > 0.0) {
    const double r0 = problem_.model.r0;
    const std::size_t n = radii.size();
    auto dev = [&](std::size_t i) { return radii[i] - prior_[i]; };
    double pen = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // the deviation vanishes just outside both ends
      const double l = (i > 0 ? dev(i - 1) : 0.0) - 2.0 * dev(i) +
                       (i + 1 < n ? dev(i + 1) : 0.0);
      pen += (l / r0) * (l / r0);
    }
    value += problem_.lambda * pen;
  }
  return value;
}

double objective(std::span<const double> radii, const InverseProblem &problem) {
  return Objective(problem)(radii);
}

std::vector<double> apply_smoothing_normal(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = (i > 0 ? v[i - 1] : 0.0) - 2.0 * v[i] + (i + 1 < n ? v[i + 1] : 0.0);
    if (i > 0)
      out[i - 1] += l;
    out[i] -= 2.0 * l;
    if (i + 1 < n)
      out[i + 1] += l;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference gradients
// ---------------------------------------------------------------------------

namespace {

double probe(const Objective &f, std::vector<double> &x, std::size_t i,
             double value) {
  const double saved = x[i];
  x[i] = value;
  const double v = f(x);
  x[i] = saved;
  if (!std::isfinite(v))
    throw NumericalError("non-finite objective while probing component " +
                         std::to_string(i));
  return v;
}

double step_for(double r, double fd_step) {
  return fd_step * std::max(std::abs(r), 1e-12);
}

} // namespace

std::vector<double> gradient(std::span<const double> radii,
                             const Objective &objective, double fd_step) {
  const auto &b = objective.problem().bounds;
  std::vector<double> x(radii.begin(), radii.end());
  const double f0 = objective(x);
  if (!std::isfinite(f0))
    throw NumericalError("non-finite objective at the base point");
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step_for(x[i], fd_step);
    // step backwards when the forward probe would leave the box
    if (x[i] + h <= b.r_max)
      g[i] = (probe(objective, x, i, x[i] + h) - f0) / h;
    else
      g[i] = (f0 - probe(objective, x, i, x[i] - h)) / h;
  }
  return g;
}

std::vector<double> gradient(std::span<const double> radii,
                             const InverseProblem &problem,
                             const SolverOptions &options) {
  return gradient(radii, Objective(problem), options.fd_step);
}

std::vector<double> gradient_central(std::span<const double> radii,
                                     const Objective &objective,
                                     double fd_step) {
  const auto &b = objective.problem().bounds;
  std::vector<double> x(radii.begin(), radii.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step_for(x[i], fd_step);
    const double hi = std::min(x[i] + h, b.r_max);
    const double lo = std::max(x[i] - h, b.r_min);
    g[i] = (probe(objective, x, i, hi) - probe(objective, x, i, lo)) / (hi - lo);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Projected descent
// ---------------------------------------------------------------------------

InverseSolution GaussDescentSolver::solve(const InverseProblem &problem,
                                          const SolverOptions &options) const {
  options.validate();
  const Objective f(problem);
  const double r0 = problem.model.r0;
  const auto &b = problem.bounds;
  const std::size_t n = problem.grid.nx();

  auto project = [&](std::vector<double> &x) {
    for (auto &v : x)
      v = std::clamp(v, b.r_min, b.r_max);
  };
  // gradient in units of r0, zeroed where a bound blocks descent
  auto projected_norm = [&](const std::vector<double> &x,
                            const std::vector<double> &g) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((x[i] <= b.r_min && g[i] > 0.0) || (x[i] >= b.r_max && g[i] < 0.0))
        continue;
      s += g[i] * r0 * g[i] * r0;
    }
    return std::sqrt(s);
  };

  std::vector<double> x =
      options.initial ? *options.initial : f.prior().empty()
                                               ? std::vector<double>(n, r0)
                                               : std::vector<double>(
                                                     f.prior().begin(),
                                                     f.prior().end());
  if (x.size() != n)
    throw DomainError("initial guess has the wrong number of cells");
  project(x);

  InverseSolution sol;
  double fx = f(x);
  sol.objective_history.push_back(fx);
  // forward differences until they stall, central differences after
  bool central = false;
  auto grad = [&](const std::vector<double> &xr) {
    return central ? gradient_central(xr, f, options.fd_step)
                   : gradient(xr, f, options.fd_step);
  };
  std::vector<double> g = grad(x);
  const double pg0 = projected_norm(x, g);
  double pg = pg0;

  auto finish = [&](bool converged, std::string reason) {
    sol.radii = x;
    sol.objective_value = fx;
    sol.residual_norm = f.residual_norm(x);
    sol.converged = converged;
    sol.gradient_norm_final = pg;
    sol.stop_reason = std::move(reason);
    return sol;
  };

  if (fx <= options.objective_tol)
    return finish(true, "exact fit");
  if (pg0 == 0.0)
    return finish(true, "stationary");

  // Search direction: the plain gradient, or a Newton-like step in the
  // interface coordinates z_m = ln D_{m-1} - ln D_m. Each echo arrival
  // depends on one z_m with Gamma ~ z/2, so the data term there is close to
  // kappa I; the smoothing term is exact. r = r(z) has dr/dz = -r0 T with
  // T = diag(u/2) C, C the running sum and u = r/r0.
  double kappa = 0.0;
  for (double v : f.echo_model().incident().samples())
    kappa += v * v;
  kappa /= 4.0 * problem.pulse.amp_forward() * problem.pulse.amp_forward();
  const double lambda = problem.lambda;
  std::vector<double> hz(n * n), chol(n * n), lt(n * n), w(n), md(n);

  // H = kappa I + 2 lambda (L T)^T (L T), factored in place
  auto build_metric = [&](const std::vector<double> &xr) {
    std::fill(lt.begin(), lt.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        auto t = [&](std::size_t row) {
          return row >= k ? 0.5 * xr[row] / r0 : 0.0;
        };
        lt[i * n + k] = (i > 0 ? t(i - 1) : 0.0) - 2.0 * t(i) +
                        (i + 1 < n ? t(i + 1) : 0.0);
      }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c <= a; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          s += lt[i * n + a] * lt[i * n + c];
        hz[a * n + c] = hz[c * n + a] = 2.0 * lambda * s + (a == c ? kappa : 0.0);
      }
    chol = hz;
    for (std::size_t j = 0; j < n; ++j) {
      double d = chol[j * n + j];
      for (std::size_t k = 0; k < j; ++k)
        d -= chol[j * n + k] * chol[j * n + k];
      d = std::sqrt(d);
      chol[j * n + j] = d;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = chol[i * n + j];
        for (std::size_t k = 0; k < j; ++k)
          s -= chol[i * n + k] * chol[j * n + k];
        chol[i * n + j] = s / d;
      }
    }
  };
  auto metric_solve = [&](std::vector<double> &v) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = v[i];
      for (std::size_t k = 0; k < i; ++k)
        s -= chol[i * n + k] * v[k];
      v[i] = s / chol[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = v[i];
      for (std::size_t k = i + 1; k < n; ++k)
        s -= chol[k * n + i] * v[k];
      v[i] = s / chol[i * n + i];
    }
  };
  // md = r0 T H^-1 T^T g, so that x - alpha r0 md moves z by -alpha H^-1 g_z
  auto direction = [&](const std::vector<double> &xr,
                       const std::vector<double> &gr) {
    if (!options.interface_metric) {
      for (std::size_t i = 0; i < n; ++i)
        md[i] = gr[i] * r0;
      return;
    }
    build_metric(xr);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 * xr[i] * gr[i];
    for (std::size_t i = n - 1; i-- > 0;)
      w[i] += w[i + 1];
    metric_solve(w);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i];
      md[i] = 0.5 * xr[i] / r0 * acc;
    }
  };
  // g_z = -r0 T^T g
  auto z_gradient = [&](const std::vector<double> &xr,
                        const std::vector<double> &gr) {
    std::vector<double> gz(n);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      acc += 0.5 * xr[i] * gr[i];
      gz[i] = -acc;
    }
    return gz;
  };

  direction(x, g);
  // unit length is the model Newton step; the first one moves at most 5% of r0
  double alpha = options.interface_metric ? std::min(1.0, 0.05 / inf_norm(md))
                                          : 0.05 / inf_norm(md);
  std::vector<double> trial(n), dir(n), x_new(n);

  std::size_t iter = 0;
  while (iter < options.max_iter) {
    // d = P(x - alpha M g) - x, with alpha acting on r/r0
    for (std::size_t i = 0; i < n; ++i)
      trial[i] = x[i] - alpha * r0 * md[i];
    project(trial);
    for (std::size_t i = 0; i < n; ++i)
      dir[i] = trial[i] - x[i];
    const double slope = dot(g, dir);
    if (inf_norm(dir) / r0 < options.step_tol)
      return finish(true, "step tolerance");

    double t = 1.0;
    bool accepted = false;
    double f_new = fx;
    if (slope < 0.0) {
      for (std::size_t k = 0; k <= options.line_search.max_backtracks; ++k) {
        for (std::size_t i = 0; i < n; ++i)
          x_new[i] = x[i] + t * dir[i];
        f_new = f(x_new);
        if (std::isfinite(f_new) &&
            f_new <= fx + options.line_search.sufficient * t * slope) {
          accepted = true;
          break;
        }
        t *= options.line_search.shrink;
      }
    }
    // an "accepted" step that changes nothing is below rounding; treat it
    // as a stall
    if (!accepted || !(f_new < fx)) {
      if (!central) {
        // the forward-difference error is O(fd_step); retry with the
        // two-sided gradient before giving up
        central = true;
        g = grad(x);
        pg = projected_norm(x, g);
        direction(x, g);
        // the old length came from the noisier gradient
        alpha = options.interface_metric ? std::min(1.0, 0.05 / inf_norm(md))
                                         : 0.05 / inf_norm(md);
        continue;
      }
      // a stall well below the initial gradient is as converged as the
      // difference gradient can tell
      const bool at_floor = pg <= std::sqrt(options.grad_tol) * pg0;
      return finish(at_floor, at_floor ? "stalled at gradient accuracy"
                                       : "line search failed");
    }

    std::vector<double> g_new = grad(x_new);
    double ss = 0.0, sy = 0.0;
    if (options.interface_metric) {
      // preconditioned length s^T H s / s^T y, H still from the old iterate
      const auto gz_old = z_gradient(x, g);
      const auto gz_new = z_gradient(x_new, g_new);
      std::vector<double> sz(n);
      double prev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double sq = 2.0 * std::log(x_new[i] / x[i]);
        sz[i] = prev - sq;
        prev = sq;
        sy += sz[i] * (gz_new[i] - gz_old[i]);
      }
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c)
          ss += sz[a] * hz[a * n + c] * sz[c];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = (x_new[i] - x[i]) / r0;
        const double y = (g_new[i] - g[i]) * r0;
        ss += s * s;
        sy += s * y;
      }
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;

    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    pg = projected_norm(x, g);
    direction(x, g);
    sol.iterations = ++iter;
    sol.objective_history.push_back(fx);

    if (fx <= options.objective_tol)
      return finish(true, "exact fit");
    if (pg <= options.grad_tol * pg0)
      return finish(true, "gradient tolerance");
  }
  return finish(false, "iteration limit");
}

InverseSolution invert_radii(const InverseProblem &problem,
                             const SolverOptions &options) {
  return GaussDescentSolver{}.solve(problem, options);
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

SolverRegistry::Handle SolverRegistry::add(const std::string &name,
                                           Handle solver) {
  if (name.empty())
    throw RegistrationError("solver name must not be empty");
  if (!solver)
    throw RegistrationError("solver '" + name + "' is null");
  std::unique_lock lock(mutex_);
  auto [it, inserted] = solvers_.emplace(name, std::move(solver));
  if (!inserted)
    throw RegistrationError("solver '" + name + "' is already registered");
  return it->second;
}

SolverRegistry::Handle SolverRegistry::find(const std::string &name) const {
  std::shared_lock lock(mutex_);
  auto it = solvers_.find(name);
  if (it == solvers_.end())
    throw NotFoundError("no solver named '" + name + "'");
  return it->second;
}

bool SolverRegistry::contains(const std::string &name) const {
  std::shared_lock lock(mutex_);
  return solvers_.count(name) != 0;
}

std::vector<std::string> SolverRegistry::names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto &[k, v] : solvers_)
    out.push_back(k);
  return out;
}

SolverRegistry &SolverRegistry::global() {
  static SolverRegistry *registry = [] {
    auto *r = new SolverRegistry;
    r->add("gauss-descent", std::make_shared<GaussDescentSolver>());
    return r;
  }();
  return *registry;
}

// ---------------------------------------------------------------------------
// Conformance
// ---------------------------------------------------------------------------

ConformanceReport check_conformance(const InverseSolver &solver,
                                    const InverseProblem &problem,
                                    const SolverOptions &options) {
  ConformanceReport rep;
  const auto a = solver.solve(problem, options);
  const auto b = solver.solve(problem, options);
  if (a.radii.size() != problem.grid.nx())
    rep.failures.push_back("radii count " + std::to_string(a.radii.size()) +
                           " != nx " + std::to_string(problem.grid.nx()));
  for (double r : a.radii) {
    if (!std::isfinite(r) || r < problem.bounds.r_min ||
        r > problem.bounds.r_max) {
      rep.failures.push_back("radius outside bounds");
      break;
    }
  }
  if (a.iterations > options.max_iter)
    rep.failures.push_back("iterations exceed max_iter");
  if (!std::isfinite(a.residual_norm) || a.residual_norm < 0.0)
    rep.failures.push_back("residual norm is not a finite non-negative value");
  if (!(a == b))
    rep.failures.push_back("repeated solves differ");
  return rep;
}

} // namespace vasosim::inversion
