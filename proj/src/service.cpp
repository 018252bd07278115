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

#include "rtmotion/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace rtmotion {

namespace {

constexpr int kPollMs = 100;

int listen_on(const std::string& host, int port, int& bound_port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error(std::string("service: socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw std::runtime_error("service: bad host " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(fd, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw std::runtime_error("service: bind " + host + ":" + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port = ntohs(addr.sin_port);
  return fd;
}

// Blocks until the whole buffer is written or the peer is gone.
bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

int accept_with_timeout(int listen_fd) {
  pollfd p{listen_fd, POLLIN, 0};
  if (::poll(&p, 1, kPollMs) <= 0) return -1;
  return ::accept(listen_fd, nullptr, nullptr);
}

}  // namespace

Service::Service(Session& session, ServiceOptions options)
    : session_(session), options_(std::move(options)), dispatcher_(session) {
  router_.add_robot(options_.robot, session_);
}

Service::~Service() { stop(); }

void Service::start() {
  if (running_) return;
  listen_fd_ = listen_on(options_.host, options_.port, port_);
  int telemetry = options_.telemetry_port;
  if (telemetry < 0) telemetry = options_.port == 0 ? 0 : options_.port + 1;
  try {
    telemetry_fd_ = listen_on(options_.host, telemetry, telemetry_port_);
  } catch (...) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw;
  }
  running_ = true;
  session_.set_listener([this](const TelemetryRecord& r) { broadcast(r); });
  dispatcher_.start();
  request_thread_ = std::thread([this] { accept_requests(); });
  telemetry_thread_ = std::thread([this] { accept_telemetry(); });
}

void Service::stop() {
  if (!running_.exchange(false)) return;
  dispatcher_.stop();
  session_.set_listener(nullptr);
  if (request_thread_.joinable()) request_thread_.join();
  if (telemetry_thread_.joinable()) telemetry_thread_.join();
  {
    const std::lock_guard lock(clients_mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : client_threads_) {
    if (t.joinable()) t.join();
  }
  client_threads_.clear();
  {
    const std::lock_guard lock(subscribers_mutex_);
    for (int fd : subscribers_) ::close(fd);
    subscribers_.clear();
  }
  ::close(listen_fd_);
  ::close(telemetry_fd_);
  listen_fd_ = telemetry_fd_ = -1;
}

void Service::accept_requests() {
  while (running_) {
    const int fd = accept_with_timeout(listen_fd_);
    if (fd < 0) continue;
    const std::lock_guard lock(clients_mutex_);
    client_fds_.push_back(fd);
    client_threads_.emplace_back([this, fd] { serve_client(fd); });
  }
}

void Service::accept_telemetry() {
  while (running_) {
    const int fd = accept_with_timeout(telemetry_fd_);
    if (fd < 0) continue;
    const std::lock_guard lock(subscribers_mutex_);
    subscribers_.push_back(fd);
  }
}

void Service::serve_client(int fd) {
  std::string buffer;
  char chunk[4096];
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const wire::Ack ack = router_.handle_line(line, dispatcher_.now());
      if (!send_all(fd, wire::serialize_ack(ack) + "\n")) {
        open = false;
        break;
      }
      ++acks_;
    }
  }
  const std::lock_guard lock(clients_mutex_);
  client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
  ::close(fd);
}

void Service::broadcast(const TelemetryRecord& record) {
  const std::string line = wire::serialize_telemetry(options_.robot, record) + "\n";
  const std::lock_guard lock(subscribers_mutex_);
  // A consumer that cannot take a whole line right now is dropped, never waited on.
  auto slow = [&](int fd) {
    const ssize_t n = ::send(fd, line.data(), line.size(), MSG_DONTWAIT | MSG_NOSIGNAL);
    if (n == static_cast<ssize_t>(line.size())) return false;
    ::close(fd);
    ++dropped_;
    return true;
  };
  subscribers_.erase(std::remove_if(subscribers_.begin(), subscribers_.end(), slow), subscribers_.end());
}

}  // namespace rtmotion
