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

#ifndef VASOSIM_RISK_HPP
#define VASOSIM_RISK_HPP

/**
 * @file risk.hpp
 * @brief Episode likelihood over a discrete horizon, time-to-episode and
 * alert dispatch.
 *
 * A likelihood provider answers Pr(V = 1 | t = i, report) for i = 0..H.
 * Step 0 is the present and is reported separately as prob_now; the
 * time-to-episode is the smallest i in 1..H maximising the probability.
 */

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vasosim/errors.hpp"

namespace vasosim::risk {

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

struct InversionProvenance {
  double residual_norm = 0.0;
  bool converged = true;
  bool operator==(const InversionProvenance &) const = default;
};

struct BiophysicsReport {
  double stenosis_index = 0.0; ///< 1 - min r / r0, clamped to [0, 1]
  double density_fractional_change = 0.0;
  double tof = 0.0;       ///< s
  double timestamp = 0.0; ///< s since epoch
  std::string session_id;
  InversionProvenance provenance;

  void validate() const;

  bool operator==(const BiophysicsReport &) const = default;
};

/// 1 - min_i r_i / r0 clamped to [0, 1].
double stenosis_index(std::span<const double> radii, double r0);

nlohmann::json to_json(const BiophysicsReport &r);
BiophysicsReport report_from_json(const nlohmann::json &j);

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

struct ProviderAnswer {
  double probability = 0.0;
  std::optional<std::string> recommendation;
};

/// Source of episode probabilities. Implementations must tolerate
/// concurrent queries.
class LikelihoodProvider {
public:
  virtual ~LikelihoodProvider() = default;
  virtual std::string name() const = 0;
  virtual ProviderAnswer query(const BiophysicsReport &report, int horizon_step,
                               double step_seconds) const = 0;
};

/// sigma(w . f(report, i) + b) with
/// f = (stenosis_index, density_fractional_change, exp(-decay i)).
class LogisticProvider final : public LikelihoodProvider {
public:
  static constexpr std::size_t kFeatures = 3;

  LogisticProvider(std::vector<double> weights, double bias,
                   double horizon_decay);

  std::string name() const override { return "logistic"; }
  ProviderAnswer query(const BiophysicsReport &report, int horizon_step,
                       double step_seconds) const override;

  std::vector<double> features(const BiophysicsReport &report,
                               int horizon_step) const;

  const std::vector<double> &weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  double horizon_decay() const noexcept { return decay_; }

private:
  std::vector<double> weights_;
  double bias_;
  double decay_;
};

std::shared_ptr<LikelihoodProvider>
logistic_provider(std::vector<double> weights, double bias,
                  double horizon_decay);

/// Wraps a callable; handy for mocks and adapters.
class CallbackProvider final : public LikelihoodProvider {
public:
  using Fn = std::function<ProviderAnswer(const BiophysicsReport &, int, double)>;

  CallbackProvider(std::string name, Fn fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}

  std::string name() const override { return name_; }
  ProviderAnswer query(const BiophysicsReport &report, int horizon_step,
                       double step_seconds) const override {
    return fn_(report, horizon_step, step_seconds);
  }

private:
  std::string name_;
  Fn fn_;
};

struct LlmOptions {
  std::string endpoint; ///< http://host[:port]/path
  double timeout = 5.0; ///< per request, s
  std::string template_version = "v1";
  int max_retries = 2;       ///< extra attempts after a transient failure
  double backoff = 0.05;     ///< first retry delay, doubled each time, s
  int max_in_flight = 4;

  void validate() const;
};

/// Remote provider speaking the JSON contract
///
///   request  {"template_version", "horizon_step", "step_seconds",
///             "features": {"stenosis_index", "density_fractional_change",
///                          "tof_s", "residual_norm", "converged"}}
///   response {"probability": number, "recommendation": string?}
///
/// Probabilities in [-0.01, 1.01] are clamped into [0, 1]; anything else is a
/// ProtocolError. Connection failures, timeouts and 5xx/429 answers are
/// retried.
class LlmProvider final : public LikelihoodProvider {
public:
  explicit LlmProvider(LlmOptions options);
  ~LlmProvider() override;

  std::string name() const override { return "llm"; }
  ProviderAnswer query(const BiophysicsReport &report, int horizon_step,
                       double step_seconds) const override;

  const LlmOptions &options() const noexcept { return options_; }

  static nlohmann::json request_body(const BiophysicsReport &report,
                                     int horizon_step, double step_seconds,
                                     const std::string &template_version);

  /// Validates a response body. Throws ProtocolError.
  static ProviderAnswer parse_response(const std::string &body);

private:
  LlmOptions options_;
  std::string scheme_host_;
  std::string path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

std::shared_ptr<LikelihoodProvider> llm_provider(LlmOptions options);

// ---------------------------------------------------------------------------
// Likelihood and time-to-episode
// ---------------------------------------------------------------------------

struct EpisodeLikelihood {
  std::vector<double> probs; ///< steps 1..H
  double prob_now = 0.0;     ///< step 0
  int horizon = 0;
  std::optional<std::string> recommendation; ///< from the step-0 answer
};

/// Pr(V = 1 | t = 0, report). Throws ProviderError (wrapping any cause) or
/// ProtocolError for values outside [0, 1].
double classify_now(const BiophysicsReport &report,
                    const LikelihoodProvider &provider,
                    double step_seconds = 3600.0);

/// Queries steps 0..H. Any failure becomes a CurveError naming the step.
EpisodeLikelihood likelihood_curve(const BiophysicsReport &report,
                                   const LikelihoodProvider &provider,
                                   int horizon, double step_seconds = 3600.0);

struct TTEResult {
  int tte_step = 1;
  double max_prob = 0.0;
  double step_seconds = 3600.0;
  std::string tie_rule = "smallest-index";

  double seconds() const { return tte_step * step_seconds; }
};

/// Smallest 1-based index attaining max(probs).
TTEResult compute_tte(std::span<const double> probs, double step_seconds);
TTEResult compute_tte(const EpisodeLikelihood &likelihood, double step_seconds);

nlohmann::json to_json(const TTEResult &t);

// ---------------------------------------------------------------------------
// Alerts
// ---------------------------------------------------------------------------

enum class Severity { info, warn, critical };

std::string to_string(Severity s);
Severity severity_from_string(const std::string &s);

struct AlertPolicy {
  double critical_prob = 0.8;
  /// tte_step <= this is critical; 0 disables the horizon rule.
  int critical_horizon = 0;
  double warn_prob = 0.5;
  /// Lowest severity that is written to the sink.
  Severity dispatch_from = Severity::warn;

  void validate() const;

  /// critical iff prob_now >= critical_prob or tte_step <= critical_horizon;
  /// otherwise warn iff prob_now or max_prob reach warn_prob.
  Severity classify(const TTEResult &tte, double prob_now) const;
};

struct AlertPayload {
  std::string session_id;
  double timestamp = 0.0;
  int tte_step = 0;
  double max_prob = 0.0;
  double prob_now = 0.0;
  std::string recommendation;
  Severity severity = Severity::info;

  std::pair<std::string, double> idempotency_key() const {
    return {session_id, timestamp};
  }

  bool operator==(const AlertPayload &) const = default;
};

nlohmann::json to_json(const AlertPayload &a);
AlertPayload alert_from_json(const nlohmann::json &j);

/// Default advice when the provider does not supply one.
std::string default_recommendation(Severity s);

class AlertSink {
public:
  virtual ~AlertSink() = default;
  /// Returns false when the idempotency key was already delivered.
  virtual bool write(const AlertPayload &payload) = 0;
};

/// Appends one JSON object per line. Keys already present in the file are
/// skipped.
class FileSink final : public AlertSink {
public:
  explicit FileSink(std::filesystem::path path) : path_(std::move(path)) {}
  bool write(const AlertPayload &payload) override;
  const std::filesystem::path &path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

/// One POST per new key with an Idempotency-Key header.
class WebhookSink final : public AlertSink {
public:
  explicit WebhookSink(std::string url, double timeout = 5.0);
  bool write(const AlertPayload &payload) override;

private:
  std::string scheme_host_;
  std::string path_;
  double timeout_;
  std::mutex mutex_;
  std::set<std::pair<std::string, double>> sent_;
};

/// Collects payloads in memory.
class MemorySink final : public AlertSink {
public:
  bool write(const AlertPayload &payload) override;
  std::vector<AlertPayload> payloads() const;

private:
  mutable std::mutex mutex_;
  std::vector<AlertPayload> payloads_;
};

/// Sink write failed; the constructed payload is preserved.
class DispatchError : public Error {
public:
  DispatchError(const std::string &what, AlertPayload payload)
      : Error(what), payload_(std::move(payload)) {}
  const AlertPayload &payload() const noexcept { return payload_; }

private:
  AlertPayload payload_;
};

struct AlertContext {
  std::string session_id;
  double timestamp = 0.0;
  std::optional<std::string> recommendation;
};

struct DispatchResult {
  AlertPayload payload;
  bool written = false; ///< false for below-threshold or duplicate keys
};

/// Builds the payload and writes it to `sink` when its severity reaches
/// policy.dispatch_from. Throws DispatchError on sink failure.
DispatchResult dispatch_alert(const TTEResult &tte, double prob_now,
                              const AlertPolicy &policy, AlertSink &sink,
                              const AlertContext &context);

/// Splits "http://host:port/path" into ("http://host:port", "/path").
/// Throws ConfigurationError for other schemes or a missing host.
std::pair<std::string, std::string> split_http_url(const std::string &url);

} // namespace vasosim::risk

#endif // VASOSIM_RISK_HPP
