// Copyright 2026 The rtmotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rtmotion/runtime.hpp"
#include "rtmotion/wire.hpp"

namespace rtmotion {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;                // 0 picks a free port
  int telemetry_port = -1;     // -1 means port + 1 (or a free port when port is 0)
  std::string robot = "arm";
};

/// Live service: requests and acks on one stream socket, telemetry broadcast
/// on another, one wall-clock dispatcher per session.
class Service {
 public:
  Service(Session& session, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds both sockets and starts dispatch; throws std::runtime_error on socket errors.
  void start();
  void stop();

  int port() const { return port_; }
  int telemetry_port() const { return telemetry_port_; }
  const Dispatcher& dispatcher() const { return dispatcher_; }
  std::uint64_t acks_sent() const { return acks_.load(); }
  std::uint64_t dropped_consumers() const { return dropped_.load(); }

 private:
  void accept_requests();
  void accept_telemetry();
  void serve_client(int fd);
  void broadcast(const TelemetryRecord& record);

  Session& session_;
  ServiceOptions options_;
  wire::Router router_;
  Dispatcher dispatcher_;

  int listen_fd_ = -1;
  int telemetry_fd_ = -1;
  int port_ = 0;
  int telemetry_port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> acks_{0};
  std::atomic<std::uint64_t> dropped_{0};

  std::thread request_thread_;
  std::thread telemetry_thread_;
  std::mutex clients_mutex_;
  std::vector<int> client_fds_;
  std::vector<std::thread> client_threads_;
  std::mutex subscribers_mutex_;
  std::vector<int> subscribers_;
};

}  // namespace rtmotion
