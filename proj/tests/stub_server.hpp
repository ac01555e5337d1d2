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

#ifndef VASOSIM_TESTS_STUB_SERVER_HPP
#define VASOSIM_TESTS_STUB_SERVER_HPP

// Local HTTP endpoint for provider and webhook tests.

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

namespace testsupport {

class StubServer {
public:
  StubServer() {
    install();
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  StubServer(const StubServer &) = delete;
  StubServer &operator=(const StubServer &) = delete;

  std::string url(const std::string &path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int hits(const std::string &path) {
    std::lock_guard lock(mutex_);
    int n = 0;
    for (const auto &p : paths_)
      n += p == path;
    return n;
  }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<std::string> idempotency_keys() {
    std::lock_guard lock(mutex_);
    return keys_;
  }
  int peak_concurrency() const { return peak_; }

private:
  void record(const httplib::Request &req) {
    std::lock_guard lock(mutex_);
    paths_.push_back(req.path);
    bodies_.push_back(req.body);
    if (req.has_header("Idempotency-Key"))
      keys_.push_back(req.get_header_value("Idempotency-Key"));
  }

  void json(const std::string &path, const std::string &body, int status = 200) {
    server_.Post(path, [this, body, status](const httplib::Request &req,
                                            httplib::Response &res) {
      record(req);
      res.status = status;
      res.set_content(body, "application/json");
    });
  }

  void install() {
    json("/ok", R"({"probability": 0.42, "recommendation": "rest and hydrate"})");
    json("/bare", R"({"probability": 0.42})");
    json("/string", R"({"probability": "high"})");
    json("/missing", R"({"recommendation": "none"})");
    json("/notjson", "hello");
    json("/array", "[0.4]");
    json("/high", R"({"probability": 1.2})");
    json("/edge-high", R"({"probability": 1.005})");
    json("/edge-low", R"({"probability": -0.005})");
    json("/badrec", R"({"probability": 0.3, "recommendation": 7})");
    json("/notfound", R"({"error": "no"})", 404);
    json("/down", R"({"error": "busy"})", 503);
    json("/hook", "{}");
    json("/hook-fail", "{}", 500);

    server_.Post("/slow", [this](const httplib::Request &req, httplib::Response &res) {
      record(req);
      std::this_thread::sleep_for(std::chrono::milliseconds(400));
      res.set_content(R"({"probability": 0.5})", "application/json");
    });
    server_.Post("/flaky", [this](const httplib::Request &req, httplib::Response &res) {
      record(req);
      if (flaky_++ == 0) {
        res.status = 503;
        return;
      }
      res.set_content(R"({"probability": 0.25})", "application/json");
    });
    server_.Post("/busy", [this](const httplib::Request &req, httplib::Response &res) {
      record(req);
      const int now = ++active_;
      int seen = peak_.load();
      while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      --active_;
      res.set_content(R"({"probability": 0.1})", "application/json");
    });
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mutex_;
  std::vector<std::string> paths_;
  std::vector<std::string> bodies_;
  std::vector<std::string> keys_;
  std::atomic<int> flaky_{0};
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

} // namespace testsupport

#endif // VASOSIM_TESTS_STUB_SERVER_HPP
