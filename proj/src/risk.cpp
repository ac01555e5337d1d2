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

#include "vasosim/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vasosim::risk {

namespace {

bool in_unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void BiophysicsReport::validate() const {
  if (!in_unit_interval(stenosis_index))
    throw DomainError("stenosis index must lie in [0, 1]");
  if (!(timestamp >= 0.0) || !std::isfinite(timestamp))
    throw DomainError("report timestamp must be non-negative");
  if (!std::isfinite(density_fractional_change) || !std::isfinite(tof) ||
      !std::isfinite(provenance.residual_norm))
    throw DomainError("report features must be finite");
}

double stenosis_index(std::span<const double> radii, double r0) {
  if (radii.empty())
    throw DomainError("stenosis index needs at least one radius");
  if (!(r0 > 0.0))
    throw DomainError("stenosis index needs r0 > 0");
  const double rmin = *std::min_element(radii.begin(), radii.end());
  return std::clamp(1.0 - rmin / r0, 0.0, 1.0);
}

nlohmann::json to_json(const BiophysicsReport &r) {
  return {{"stenosis_index", r.stenosis_index},
          {"density_fractional_change", r.density_fractional_change},
          {"tof_s", r.tof},
          {"timestamp", r.timestamp},
          {"session_id", r.session_id},
          {"residual_norm", r.provenance.residual_norm},
          {"converged", r.provenance.converged}};
}

BiophysicsReport report_from_json(const nlohmann::json &j) {
  try {
    BiophysicsReport r;
    r.stenosis_index = j.at("stenosis_index").get<double>();
    r.density_fractional_change =
        j.value("density_fractional_change", 0.0);
    r.tof = j.value("tof_s", 0.0);
    r.timestamp = j.value("timestamp", 0.0);
    r.session_id = j.value("session_id", std::string{});
    r.provenance.residual_norm = j.value("residual_norm", 0.0);
    r.provenance.converged = j.value("converged", true);
    r.validate();
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("biophysics report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Logistic provider
// ---------------------------------------------------------------------------

LogisticProvider::LogisticProvider(std::vector<double> weights, double bias,
                                   double horizon_decay)
    : weights_(std::move(weights)), bias_(bias), decay_(horizon_decay) {
  if (weights_.size() != kFeatures)
    throw DomainError("logistic provider expects " +
                      std::to_string(kFeatures) + " weights, got " +
                      std::to_string(weights_.size()));
  for (double w : weights_)
    if (!std::isfinite(w))
      throw DomainError("logistic weights must be finite");
  if (!std::isfinite(bias_) || !std::isfinite(decay_))
    throw DomainError("logistic bias and decay must be finite");
}

std::vector<double> LogisticProvider::features(const BiophysicsReport &report,
                                               int horizon_step) const {
  return {report.stenosis_index, report.density_fractional_change,
          std::exp(-decay_ * static_cast<double>(horizon_step))};
}

ProviderAnswer LogisticProvider::query(const BiophysicsReport &report,
                                       int horizon_step, double) const {
  const auto f = features(report, horizon_step);
  double z = bias_;
  for (std::size_t k = 0; k < kFeatures; ++k)
    z += weights_[k] * f[k];
  const double p = 1.0 / (1.0 + std::exp(-z));
  if (!std::isfinite(p))
    throw NumericalError("logistic provider produced a non-finite value");
  return {p, std::nullopt};
}

std::shared_ptr<LikelihoodProvider>
logistic_provider(std::vector<double> weights, double bias,
                  double horizon_decay) {
  return std::make_shared<LogisticProvider>(std::move(weights), bias,
                                            horizon_decay);
}

// ---------------------------------------------------------------------------
// Likelihood
// ---------------------------------------------------------------------------

namespace {

ProviderAnswer checked_query(const BiophysicsReport &report,
                             const LikelihoodProvider &provider, int step,
                             double step_seconds) {
  ProviderAnswer a;
  try {
    a = provider.query(report, step, step_seconds);
  } catch (const ProviderError &) {
    throw;
  } catch (const std::exception &e) {
    throw ProviderError(provider.name() + " provider failed: " + e.what());
  }
  if (!in_unit_interval(a.probability))
    throw ProtocolError(provider.name() + " provider returned probability " +
                        std::to_string(a.probability) + " outside [0, 1]");
  return a;
}

} // namespace

double classify_now(const BiophysicsReport &report,
                    const LikelihoodProvider &provider, double step_seconds) {
  report.validate();
  return checked_query(report, provider, 0, step_seconds).probability;
}

EpisodeLikelihood likelihood_curve(const BiophysicsReport &report,
                                   const LikelihoodProvider &provider,
                                   int horizon, double step_seconds) {
  if (horizon < 1)
    throw DomainError("likelihood horizon must be at least 1");
  report.validate();
  EpisodeLikelihood out;
  out.horizon = horizon;
  out.probs.reserve(static_cast<std::size_t>(horizon));
  for (int i = 0; i <= horizon; ++i) {
    ProviderAnswer a;
    try {
      a = checked_query(report, provider, i, step_seconds);
    } catch (const ProviderError &e) {
      throw CurveError(i, e.what());
    }
    if (i == 0) {
      out.prob_now = a.probability;
      out.recommendation = a.recommendation;
    } else {
      out.probs.push_back(a.probability);
    }
  }
  return out;
}

TTEResult compute_tte(std::span<const double> probs, double step_seconds) {
  if (probs.empty())
    throw DomainError("time-to-episode needs a non-empty probability curve");
  // max_element returns the first maximum
  const auto it = std::max_element(probs.begin(), probs.end());
  TTEResult r;
  r.tte_step = static_cast<int>(it - probs.begin()) + 1;
  r.max_prob = *it;
  r.step_seconds = step_seconds;
  return r;
}

TTEResult compute_tte(const EpisodeLikelihood &likelihood,
                      double step_seconds) {
  return compute_tte(likelihood.probs, step_seconds);
}

nlohmann::json to_json(const TTEResult &t) {
  return {{"tte_step", t.tte_step},
          {"max_prob", t.max_prob},
          {"step_seconds", t.step_seconds},
          {"tte_seconds", t.seconds()},
          {"tie_rule", t.tie_rule}};
}

// ---------------------------------------------------------------------------
// Alerts
// ---------------------------------------------------------------------------

std::string to_string(Severity s) {
  switch (s) {
  case Severity::info:
    return "info";
  case Severity::warn:
    return "warn";
  case Severity::critical:
    return "critical";
  }
  return "info";
}

Severity severity_from_string(const std::string &s) {
  if (s == "info")
    return Severity::info;
  if (s == "warn")
    return Severity::warn;
  if (s == "critical")
    return Severity::critical;
  throw FormatError("unknown severity '" + s + "'");
}

void AlertPolicy::validate() const {
  if (!in_unit_interval(critical_prob) || !in_unit_interval(warn_prob))
    throw DomainError("alert thresholds must lie in [0, 1]");
  if (critical_horizon < 0)
    throw DomainError("critical horizon must be non-negative");
}

Severity AlertPolicy::classify(const TTEResult &tte, double prob_now) const {
  if (prob_now >= critical_prob || tte.tte_step <= critical_horizon)
    return Severity::critical;
  if (prob_now >= warn_prob || tte.max_prob >= warn_prob)
    return Severity::warn;
  return Severity::info;
}

nlohmann::json to_json(const AlertPayload &a) {
  return {{"session_id", a.session_id},     {"timestamp", a.timestamp},
          {"tte_step", a.tte_step},         {"max_prob", a.max_prob},
          {"prob_now", a.prob_now},         {"recommendation", a.recommendation},
          {"severity", to_string(a.severity)}};
}

AlertPayload alert_from_json(const nlohmann::json &j) {
  try {
    AlertPayload a;
    a.session_id = j.at("session_id").get<std::string>();
    a.timestamp = j.at("timestamp").get<double>();
    a.tte_step = j.at("tte_step").get<int>();
    a.max_prob = j.at("max_prob").get<double>();
    a.prob_now = j.at("prob_now").get<double>();
    a.recommendation = j.at("recommendation").get<std::string>();
    a.severity = severity_from_string(j.at("severity").get<std::string>());
    return a;
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("alert payload: ") + e.what());
  }
}

std::string default_recommendation(Severity s) {
  switch (s) {
  case Severity::critical:
    return "High likelihood of a vaso-occlusive episode. Contact emergency "
           "services or your care team now.";
  case Severity::warn:
    return "Elevated episode risk. Hydrate, rest, avoid cold exposure and "
           "contact your care team for a review today.";
  case Severity::info:
    break;
  }
  return "No elevated risk detected. Continue routine monitoring.";
}

bool FileSink::write(const AlertPayload &payload) {
  std::lock_guard lock(mutex_);
  const auto key = payload.idempotency_key();
  {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty())
        continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        continue;
      if (j.value("session_id", std::string{}) == key.first &&
          j.contains("timestamp") && j["timestamp"].is_number() &&
          j["timestamp"].get<double>() == key.second)
        return false;
    }
  }
  std::ofstream out(path_, std::ios::app);
  if (!out)
    throw Error("cannot open alert file " + path_.string());
  out << to_json(payload).dump() << '\n';
  out.flush();
  if (!out)
    throw Error("failed writing alert file " + path_.string());
  return true;
}

bool MemorySink::write(const AlertPayload &payload) {
  std::lock_guard lock(mutex_);
  for (const auto &p : payloads_)
    if (p.idempotency_key() == payload.idempotency_key())
      return false;
  payloads_.push_back(payload);
  return true;
}

std::vector<AlertPayload> MemorySink::payloads() const {
  std::lock_guard lock(mutex_);
  return payloads_;
}

DispatchResult dispatch_alert(const TTEResult &tte, double prob_now,
                              const AlertPolicy &policy, AlertSink &sink,
                              const AlertContext &context) {
  policy.validate();
  DispatchResult r;
  auto &p = r.payload;
  p.session_id = context.session_id;
  p.timestamp = context.timestamp;
  p.tte_step = tte.tte_step;
  p.max_prob = tte.max_prob;
  p.prob_now = prob_now;
  p.severity = policy.classify(tte, prob_now);
  p.recommendation = context.recommendation.value_or(
      default_recommendation(p.severity));

  if (p.severity < policy.dispatch_from)
    return r;
  try {
    r.written = sink.write(p);
  } catch (const std::exception &e) {
    throw DispatchError(std::string("alert sink failed: ") + e.what(), p);
  }
  return r;
}

} // namespace vasosim::risk
