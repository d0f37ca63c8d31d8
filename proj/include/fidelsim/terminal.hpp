/*
 * Copyright 2026 the fidelsim authors
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

//
// UART byte-stream endpoints. The simulation side is single-threaded:
// received bytes are handed over through a queue and drained into the RX
// FIFO at cycle boundaries only. Scripted input carries injection cycles
// for deterministic runs; stdio and tcp stamp bytes "now".
//
// Script file format, one event per line:
//   <cycle> str:<text to end of line>
//   <cycle> hex:<hex digit pairs>
// '#' starts a comment.
//

#ifndef FIDELSIM_TERMINAL_HPP
#define FIDELSIM_TERMINAL_HPP

#include <atomic>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "fidelsim/fault.hpp"

namespace fidelsim {

/// One UART's external byte stream.
class ByteEndpoint {
 public:
  virtual ~ByteEndpoint() = default;
  /// Called by the TX drain process, one byte per dispatch.
  virtual void on_tx(uint8_t b) = 0;
  /// Next received byte due at or before `cycle`, if any. Called at cycle
  /// boundaries until it returns nullopt or the RX FIFO fills.
  virtual std::optional<uint8_t> next_rx(uint64_t cycle) = 0;
};

/// In-memory endpoint: collects TX bytes and injects scripted RX bytes at
/// fixed cycles. The default for tests and batch runs.
class CaptureEndpoint : public ByteEndpoint {
 public:
  void on_tx(uint8_t b) override { tx_.push_back(b); }

  std::optional<uint8_t> next_rx(uint64_t cycle) override {
    if (rx_.empty() || rx_.front().first > cycle) return std::nullopt;
    uint8_t b = rx_.front().second;
    rx_.pop_front();
    return b;
  }

  void script_byte(uint64_t cycle, uint8_t b) {
    if (!rx_.empty() && rx_.back().first > cycle)
      throw ConfigError("scripted input must be ordered by cycle");
    rx_.emplace_back(cycle, b);
  }

  void script_text(uint64_t cycle, const std::string& text) {
    for (char c : text) script_byte(cycle, static_cast<uint8_t>(c));
  }

  const std::vector<uint8_t>& tx_bytes() const { return tx_; }
  std::string tx_string() const { return std::string(tx_.begin(), tx_.end()); }

 private:
  std::vector<uint8_t> tx_;
  std::deque<std::pair<uint64_t, uint8_t>> rx_;
};

/// Parse a script file into an endpoint (TX still captured in memory).
inline void load_script(CaptureEndpoint& ep, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open script file " + path);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line.substr(start));
    uint64_t cycle;
    std::string payload;
    if (!(ls >> cycle >> payload))
      throw ConfigError("script line " + std::to_string(lineno) + ": expected <cycle> <payload>");
    if (payload.rfind("str:", 0) == 0) {
      std::string rest;
      std::getline(ls, rest);  // keep spaces after the first token
      ep.script_text(cycle, payload.substr(4) + rest);
    } else if (payload.rfind("hex:", 0) == 0) {
      std::string hex = payload.substr(4);
      if (hex.size() % 2)
        throw ConfigError("script line " + std::to_string(lineno) + ": odd hex digit count");
      for (size_t i = 0; i < hex.size(); i += 2)
        ep.script_byte(cycle,
                       static_cast<uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    } else {
      throw ConfigError("script line " + std::to_string(lineno) +
                        ": payload must start with str: or hex:");
    }
  }
}

/// Thread-safe handoff queue shared by the interactive endpoints.
class RxQueue {
 public:
  void push(uint8_t b) {
    std::lock_guard<std::mutex> lock(mu_);
    q_.push_back(b);
  }
  std::optional<uint8_t> pop() {
    std::lock_guard<std::mutex> lock(mu_);
    if (q_.empty()) return std::nullopt;
    uint8_t b = q_.front();
    q_.pop_front();
    return b;
  }

 private:
  std::mutex mu_;
  std::deque<uint8_t> q_;
};

/// TX to stdout, RX from stdin (read by a background thread).
class StdioEndpoint : public ByteEndpoint {
 public:
  StdioEndpoint() {
    reader_ = std::thread([this] {
      int c;
      while (!stop_.load(std::memory_order_relaxed) && (c = std::getchar()) != EOF)
        rx_.push(static_cast<uint8_t>(c));
    });
  }

  ~StdioEndpoint() override {
    stop_.store(true, std::memory_order_relaxed);
    reader_.detach();  // getchar may block forever; the process is exiting anyway
  }

  void on_tx(uint8_t b) override {
    std::fputc(b, stdout);
    std::fflush(stdout);
  }

  std::optional<uint8_t> next_rx(uint64_t) override { return rx_.pop(); }

 private:
  RxQueue rx_;
  std::thread reader_;
  std::atomic<bool> stop_{false};
};

/// One-client TCP endpoint. A client disconnect pauses RX without faulting
/// the simulation; TX while disconnected is dropped.
class TcpEndpoint : public ByteEndpoint {
 public:
  explicit TcpEndpoint(uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ConfigError("tcp endpoint: socket failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        ::listen(listen_fd_, 1) < 0) {
      ::close(listen_fd_);
      throw ConfigError("tcp endpoint: cannot bind port " + std::to_string(port));
    }
    server_ = std::thread([this] { serve(); });
  }

  ~TcpEndpoint() override {
    stop_.store(true, std::memory_order_relaxed);
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    int fd = client_fd_.exchange(-1);
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
    }
    if (server_.joinable()) server_.join();
  }

  void on_tx(uint8_t b) override {
    int fd = client_fd_.load(std::memory_order_relaxed);
    if (fd >= 0) (void)!::send(fd, &b, 1, MSG_NOSIGNAL);
  }

  std::optional<uint8_t> next_rx(uint64_t) override { return rx_.pop(); }

 private:
  void serve() {
    while (!stop_.load(std::memory_order_relaxed)) {
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) return;
      client_fd_.store(fd, std::memory_order_relaxed);
      uint8_t buf[256];
      ssize_t n;
      while ((n = ::recv(fd, buf, sizeof(buf), 0)) > 0)
        for (ssize_t i = 0; i < n; ++i) rx_.push(buf[i]);
      if (client_fd_.exchange(-1) >= 0) ::close(fd);
    }
  }

  int listen_fd_ = -1;
  std::atomic<int> client_fd_{-1};
  std::atomic<bool> stop_{false};
  std::thread server_;
  RxQueue rx_;
};

/// Split endpoint: scripted/captured RX schedule with TX forwarded both to
/// the capture buffer and an extra sink (stdout or a file).
class TeeEndpoint : public ByteEndpoint {
 public:
  TeeEndpoint(CaptureEndpoint& inner, std::FILE* sink) : inner_(inner), sink_(sink) {}

  void on_tx(uint8_t b) override {
    inner_.on_tx(b);
    if (sink_) {
      std::fputc(b, sink_);
      std::fflush(sink_);
    }
  }
  std::optional<uint8_t> next_rx(uint64_t cycle) override { return inner_.next_rx(cycle); }

 private:
  CaptureEndpoint& inner_;
  std::FILE* sink_;
};

}  // namespace fidelsim

#endif  // FIDELSIM_TERMINAL_HPP
