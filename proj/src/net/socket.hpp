#pragma once

// Thin POSIX TCP helpers shared by the coordinator and the parties.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ghztp::net::detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void reset();

 private:
  int fd_ = -1;
};

// Throws ConnectionError. `bound_port` receives the actual port.
Fd listen_tcp(const std::string& host, std::uint16_t port, std::uint16_t& bound_port);

// Retries refused connections until `timeout`. Throws ConnectionError.
Fd connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

// Writes `line` plus '\n'. False if the peer is gone.
bool send_line(int fd, std::string_view line);

// Splits a byte stream into lines. A line that grows past the frame cap
// without a newline is handed out as-is (oversize) so the decoder rejects it.
class LineBuffer {
 public:
  void append(const char* data, std::size_t n) { buf_.append(data, n); }
  std::optional<std::string> next();

 private:
  std::string buf_;
};

}  // namespace ghztp::net::detail
