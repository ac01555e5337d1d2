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

#ifndef VASOSIM_ERRORS_HPP
#define VASOSIM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vasosim {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Input / configuration errors (CLI exit code 2)
// ---------------------------------------------------------------------------

/// A numeric argument lies outside the domain of the operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Inconsistent or invalid configuration (e.g. sampling below Nyquist).
class ConfigurationError : public Error {
public:
  using Error::Error;
};

/// Malformed file content.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Stored checksum does not match file content.
class CorruptionError : public Error {
public:
  using Error::Error;
};

/// Dataset manifest written by an incompatible format version.
class VersionError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Simulation errors (exit code 3)
// ---------------------------------------------------------------------------

/// An explicit update would violate its stability limit.
class StabilityError : public Error {
public:
  using Error::Error;
};

/// The flow solver produced a non-physical state.
class SimulationError : public Error {
public:
  SimulationError(std::size_t step, const std::string &what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

// ---------------------------------------------------------------------------
// Estimation / optimisation errors
// ---------------------------------------------------------------------------

/// Time-of-flight estimation is impossible (e.g. an all-zero trace).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// The correlation peak is below the configured confidence floor.
class LowConfidenceError : public EstimationError {
public:
  LowConfidenceError(double peak, double floor)
      : EstimationError("peak correlation " + std::to_string(peak) +
                        " below floor " + std::to_string(floor)),
        peak_(peak) {}

  double peak() const noexcept { return peak_; }

private:
  double peak_;
};

/// A finite-difference probe hit a non-finite objective.
class NumericalError : public Error {
public:
  using Error::Error;
};

class RegistrationError : public Error {
public:
  using Error::Error;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Likelihood provider errors (exit code 5)
// ---------------------------------------------------------------------------

/// A likelihood provider failed to answer.
class ProviderError : public Error {
public:
  using Error::Error;
};

class ProviderTimeoutError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// Non-2xx HTTP status or connection failure.
class TransportError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// The provider answered with a payload that violates the wire contract.
class ProtocolError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// A provider failure while building a likelihood curve; names the step.
class CurveError : public ProviderError {
public:
  CurveError(int step, const std::string &cause)
      : ProviderError("horizon step " + std::to_string(step) + ": " + cause),
        step_(step) {}

  int step() const noexcept { return step_; }

private:
  int step_;
};

} // namespace vasosim

#endif // VASOSIM_ERRORS_HPP
