#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <map>

#include "ghztp/net.hpp"
#include "socket.hpp"

namespace ghztp::net {

namespace {

// Connections beyond this (before the three roles settle) are refused.
constexpr std::size_t kMaxConnections = 32;

void write_file_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConnectionError("cannot write " + tmp.string());
    f << text;
  }
  std::filesystem::rename(tmp, path);
}

struct Peer {
  detail::Fd fd;
  detail::LineBuffer buffer;
};

}  // namespace

ServeResult serve(const ServeConfig& config) {
  std::uint16_t port = 0;
  auto listener = detail::listen_tcp(config.host, config.port, port);
  if (config.port_file) write_file_atomically(*config.port_file, std::to_string(port) + "\n");

  CoordinatorCore core(CoordinatorConfig{config.seed, "ghztp-" + std::to_string(config.seed)});
  std::map<int, Peer> peers;
  int next_conn = 0;
  const auto deadline = std::chrono::steady_clock::now() + config.timeout;

  auto dispatch = [&](std::vector<Outgoing> out) {
    for (const auto& o : out) {
      const auto it = peers.find(o.conn);
      if (it == peers.end()) continue;
      detail::send_line(it->second.fd.get(), encode(o.message));
    }
    // The core decides when a connection is done; drop those sockets.
    for (auto it = peers.begin(); it != peers.end();) {
      if (core.closed(it->first)) {
        ::shutdown(it->second.fd.get(), SHUT_RDWR);
        it = peers.erase(it);
      } else {
        ++it;
      }
    }
  };

  while (!core.finished() && !core.stall()) {
    std::vector<pollfd> fds;
    std::vector<int> conn_ids;
    fds.push_back({listener.get(), POLLIN, 0});
    for (const auto& [id, peer] : peers) {
      fds.push_back({peer.fd.get(), POLLIN, 0});
      conn_ids.push_back(id);
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      dispatch(core.on_deadline());
      break;
    }
    const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(remaining.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError("poll failed");
    }
    if (rc == 0) continue;

    if (fds[0].revents & POLLIN) {
      detail::Fd fd(::accept4(listener.get(), nullptr, nullptr, SOCK_CLOEXEC));
      if (fd.valid() && peers.size() < kMaxConnections) {
        peers.emplace(next_conn++, Peer{std::move(fd), {}});
      }
    }
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const int id = conn_ids[i - 1];
      auto it = peers.find(id);
      if (it == peers.end()) continue;
      char buf[8192];
      const ssize_t n = ::recv(it->second.fd.get(), buf, sizeof buf, 0);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        peers.erase(it);
        dispatch(core.on_disconnect(id));
        continue;
      }
      it->second.buffer.append(buf, static_cast<std::size_t>(n));
      for (;;) {
        const auto pit = peers.find(id);
        if (pit == peers.end()) break;
        auto line = pit->second.buffer.next();
        if (!line) break;
        dispatch(core.on_line(id, *line));
        if (core.finished() || core.stall()) break;
      }
    }
  }

  ServeResult result{core.finished(), core.stall(), core.transcript_text()};
  if (config.transcript_file) write_file_atomically(*config.transcript_file, result.transcript);
  return result;
}

}  // namespace ghztp::net
