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

// HTTP-backed pieces of the risk module: the remote likelihood provider and
// the webhook alert sink.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <regex>
#include <thread>

#include <httplib.h>

#include "vasosim/risk.hpp"

namespace vasosim::risk {

namespace {

void apply_timeouts(httplib::Client &cli, double timeout) {
  const auto usec = static_cast<long long>(std::llround(timeout * 1e6));
  const time_t sec = static_cast<time_t>(usec / 1000000);
  const time_t rem = static_cast<time_t>(usec % 1000000);
  cli.set_connection_timeout(sec, rem);
  cli.set_read_timeout(sec, rem);
  cli.set_write_timeout(sec, rem);
}

// Holds one in-flight slot for the lifetime of a request.
class SlotGuard {
public:
  explicit SlotGuard(std::counting_semaphore<1024> &s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard &) = delete;
  SlotGuard &operator=(const SlotGuard &) = delete;

private:
  std::counting_semaphore<1024> &s_;
};

} // namespace

std::pair<std::string, std::string> split_http_url(const std::string &url) {
  static const std::regex re(R"(^([A-Za-z][A-Za-z0-9+.-]*)://([^/:?#]+)(:[0-9]+)?(/[^#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re))
    throw ConfigurationError("malformed URL '" + url + "'");
  if (m[1].str() != "http")
    throw ConfigurationError("unsupported URL scheme '" + m[1].str() +
                             "' (only http is available)");
  std::string path = m[4].matched ? m[4].str() : "/";
  return {"http://" + m[2].str() + m[3].str(), path};
}

// ---------------------------------------------------------------------------
// LLM provider
// ---------------------------------------------------------------------------

void LlmOptions::validate() const {
  if (endpoint.empty())
    throw ConfigurationError("llm provider needs an endpoint");
  split_http_url(endpoint);
  if (!(timeout > 0.0) || !std::isfinite(timeout))
    throw ConfigurationError("llm timeout must be positive");
  if (max_retries < 0)
    throw ConfigurationError("llm retry count must be non-negative");
  if (!(backoff >= 0.0))
    throw ConfigurationError("llm backoff must be non-negative");
  if (max_in_flight < 1 || max_in_flight > 1024)
    throw ConfigurationError("llm in-flight cap must lie in [1, 1024]");
}

LlmProvider::LlmProvider(LlmOptions options)
    : options_(std::move(options)), in_flight_(1) {
  options_.validate();
  std::tie(scheme_host_, path_) = split_http_url(options_.endpoint);
  // the semaphore starts with one slot; open the rest
  in_flight_.release(options_.max_in_flight - 1);
}

LlmProvider::~LlmProvider() = default;

nlohmann::json LlmProvider::request_body(const BiophysicsReport &report,
                                         int horizon_step, double step_seconds,
                                         const std::string &template_version) {
  return {{"template_version", template_version},
          {"horizon_step", horizon_step},
          {"step_seconds", step_seconds},
          {"features",
           {{"stenosis_index", report.stenosis_index},
            {"density_fractional_change", report.density_fractional_change},
            {"tof_s", report.tof},
            {"residual_norm", report.provenance.residual_norm},
            {"converged", report.provenance.converged}}}};
}

ProviderAnswer LlmProvider::parse_response(const std::string &body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ProtocolError("llm response is not a JSON object");
  if (!j.contains("probability"))
    throw ProtocolError("llm response lacks 'probability'");
  const auto &p = j["probability"];
  if (!p.is_number())
    throw ProtocolError("llm 'probability' is not a number");
  const double v = p.get<double>();
  if (!(v >= -0.01 && v <= 1.01))
    throw ProtocolError("llm probability " + std::to_string(v) +
                        " outside the accepted band [-0.01, 1.01]");
  ProviderAnswer a;
  a.probability = std::clamp(v, 0.0, 1.0);
  if (j.contains("recommendation")) {
    const auto &r = j["recommendation"];
    if (!r.is_string())
      throw ProtocolError("llm 'recommendation' is not a string");
    a.recommendation = r.get<std::string>();
  }
  return a;
}

ProviderAnswer LlmProvider::query(const BiophysicsReport &report,
                                  int horizon_step,
                                  double step_seconds) const {
  SlotGuard slot(in_flight_);
  const std::string body =
      request_body(report, horizon_step, step_seconds, options_.template_version)
          .dump();

  bool last_was_timeout = false;
  std::string last_cause;
  const int attempts = options_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double delay = options_.backoff * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Client cli(scheme_host_);
    apply_timeouts(cli, options_.timeout);
    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, body, "application/json");
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;

    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout ||
                         (err == httplib::Error::Read &&
                          elapsed.count() >= 0.9 * options_.timeout);
      last_cause = httplib::to_string(err);
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300)
      return parse_response(res->body);
    if (status >= 500 || status == 429) {
      last_was_timeout = false;
      last_cause = "HTTP " + std::to_string(status);
      continue;
    }
    throw TransportError("llm endpoint answered HTTP " +
                         std::to_string(status));
  }
  const std::string msg = "llm endpoint failed after " +
                          std::to_string(attempts) + " attempt(s): " +
                          last_cause;
  if (last_was_timeout)
    throw ProviderTimeoutError(msg + " (timeout " +
                               std::to_string(options_.timeout) + " s)");
  throw TransportError(msg);
}

std::shared_ptr<LikelihoodProvider> llm_provider(LlmOptions options) {
  return std::make_shared<LlmProvider>(std::move(options));
}

// ---------------------------------------------------------------------------
// Webhook sink
// ---------------------------------------------------------------------------

WebhookSink::WebhookSink(std::string url, double timeout) : timeout_(timeout) {
  std::tie(scheme_host_, path_) = split_http_url(url);
  if (!(timeout > 0.0))
    throw ConfigurationError("webhook timeout must be positive");
}

bool WebhookSink::write(const AlertPayload &payload) {
  std::lock_guard lock(mutex_);
  const auto key = payload.idempotency_key();
  if (sent_.count(key))
    return false;
  httplib::Client cli(scheme_host_);
  apply_timeouts(cli, timeout_);
  httplib::Headers headers{
      {"Idempotency-Key", key.first + ":" + nlohmann::json(key.second).dump()}};
  auto res = cli.Post(path_, headers, to_json(payload).dump(), "application/json");
  if (!res)
    throw TransportError("webhook unreachable: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("webhook answered HTTP " + std::to_string(res->status));
  sent_.insert(key);
  return true;
}

} // namespace vasosim::risk
