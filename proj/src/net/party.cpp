#include <poll.h>
#include <sys/socket.h>

#include <cerrno>
#include <csignal>

#include "ghztp/net.hpp"
#include "socket.hpp"

namespace ghztp::net {

using nlohmann::json;

namespace {

struct Exit {
  int code;
  std::string diagnostic;
};

[[noreturn]] void protocol_error(std::string what) { throw Exit{1, "protocol error: " + what}; }

// One role's reactive script. Every incoming frame either advances it or
// ends the run.
class Script {
 public:
  Script(const PartyConfig& config, int fd) : config_(config), fd_(fd) {}

  void start() { send(Kind::Hello, json{{"role", protocol::to_string(config_.role)}}); }

  // True once the coordinator reported completion.
  bool on_message(const WireMessage& m) {
    switch (m.kind) {
      case Kind::Error: {
        const auto code = m.body.value("code", std::string());
        const auto message = m.body.value("message", std::string());
        if (code == code::kStalled) throw Exit{5, message};
        protocol_error(code + ": " + message);
      }
      case Kind::Finish:
        if (config_.role == Role::Bob && !bob_state_) protocol_error("finished without Bob's state");
        return true;
      case Kind::Grant: return on_grant(m);
      case Kind::OpResult: on_result(m); return false;
      case Kind::Classical: on_classical(m); return false;
      default: protocol_error("unexpected " + std::string(to_string(m.kind)));
    }
  }

  std::optional<qsim::StateVector> bob_state() const { return bob_state_; }

 private:
  void send(Kind kind, json body) {
    const WireMessage m{++seq_, session_id_, kind, std::move(body)};
    if (!detail::send_line(fd_, encode(m))) throw Exit{4, "connection lost while sending"};
  }

  void request(const std::string& op, std::vector<int> qubits, json extra = json::object()) {
    extra["op"] = op;
    extra["qubits"] = std::move(qubits);
    pending_op_ = op;
    send(Kind::OpRequest, std::move(extra));
  }

  bool on_grant(const WireMessage& m) {
    if (granted_) protocol_error("second Grant");
    granted_ = true;
    session_id_ = m.session_id;
    if (config_.role == Role::Alice) {
      if (!config_.signal) protocol_error("Alice has no signal to send");
      const auto& s = *config_.signal;
      request("prepare", {0},
              json{{"alpha", {s.alpha().real(), s.alpha().imag()}},
                   {"beta", {s.beta().real(), s.beta().imag()}}});
    }
    return false;
  }

  void on_result(const WireMessage& m) {
    const auto op = m.body.value("op", std::string());
    if (!pending_op_ || op != *pending_op_) protocol_error("OpResult for '" + op + "' unexpected");
    pending_op_.reset();
    if (op == "prepare") {
      request("bell_measure", {0, 1});
    } else if (op == "bell_measure") {
      send(Kind::Classical, json{{"to", {"Bob", "Charlie"}}, {"payload", m.body.at("outcome")}});
    } else if (op == "apply_correction") {
      if (config_.role == Role::Charlie) {
        measure();
      } else if (final_sent_) {
        request("fetch_bob_state", {2});
      } else if (charlie_result_) {
        final_step();
      }
    } else if (op == "basis_measure") {
      send(Kind::Classical, json{{"to", {"Bob"}}, {"payload", m.body.at("outcome")}});
    } else if (op == "fetch_bob_state") {
      std::vector<qsim::Complex> amps;
      for (const auto& a : m.body.at("state")) amps.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
      bob_state_ = qsim::StateVector::from_amplitudes(std::move(amps));
    } else {
      protocol_error("unknown op result '" + op + "'");
    }
  }

  void on_classical(const WireMessage& m) {
    const auto from = protocol::parse_role(m.body.at("from").get<std::string>());
    const auto payload = m.body.at("payload").get<std::string>();
    if (from == Role::Alice && config_.role != Role::Alice && !bell_) {
      bell_ = qsim::parse_bell_outcome(payload);
      const auto& entry = protocol::bell_correction(*bell_);
      const auto& unitary = config_.role == Role::Bob ? entry.bob.name : entry.charlie.name;
      const int qubit = config_.role == Role::Bob ? 2 : 3;
      if (unitary != "I") {
        request("apply_correction", {qubit},
                json{{"stage", "bell"}, {"outcome", payload}, {"unitary", unitary}});
      } else if (config_.role == Role::Charlie) {
        measure();
      }
      return;
    }
    if (from == Role::Charlie && config_.role == Role::Bob && bell_ && !charlie_result_) {
      charlie_result_ = qsim::parse_charlie_outcome(payload);
      // Acts only once both messages are in and its Bell correction is done.
      if (!pending_op_) final_step();
      return;
    }
    protocol_error("unexpected message from " + std::string(protocol::to_string(from)));
  }

  void measure() {
    if (config_.die_before_measure) std::raise(SIGKILL);
    request("basis_measure", {3}, json{{"basis", "plus_minus"}});
  }

  void final_step() {
    if (final_sent_) return;
    final_sent_ = true;
    const auto& u = protocol::charlie_correction(*charlie_result_);
    if (u.name != "I") {
      request("apply_correction", {2},
              json{{"stage", "final"},
                   {"outcome", qsim::to_string(*charlie_result_)},
                   {"unitary", u.name}});
      return;
    }
    request("fetch_bob_state", {2});
  }

  const PartyConfig& config_;
  int fd_;
  std::int64_t seq_ = 0;
  std::string session_id_;
  bool granted_ = false;
  std::optional<std::string> pending_op_;
  std::optional<qsim::BellOutcome> bell_;
  std::optional<qsim::CharlieOutcome> charlie_result_;
  bool final_sent_ = false;
  std::optional<qsim::StateVector> bob_state_;
};

}  // namespace

PartyResult run_party(const PartyConfig& config) {
  detail::Fd fd;
  try {
    fd = detail::connect_tcp(config.host, config.port, config.connect_timeout);
  } catch (const ConnectionError& e) {
    return PartyResult{4, e.what(), std::nullopt};
  }

  Script script(config, fd.get());
  detail::LineBuffer buffer;
  const auto deadline = std::chrono::steady_clock::now() + config.timeout;
  try {
    script.start();
    for (;;) {
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw Exit{5, "timed out waiting for the coordinator"};
      pollfd p{fd.get(), POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(remaining.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc <= 0) continue;
      char buf[8192];
      const ssize_t n = ::recv(fd.get(), buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Exit{4, "connection to the coordinator lost"};
      buffer.append(buf, static_cast<std::size_t>(n));
      while (auto line = buffer.next()) {
        WireMessage m;
        try {
          m = decode(*line);
        } catch (const FrameError& e) {
          protocol_error(e.what());
        }
        bool done = false;
        try {
          done = script.on_message(m);
        } catch (const ValidationError& e) {
          protocol_error(e.what());
        } catch (const nlohmann::json::exception& e) {
          protocol_error(e.what());
        }
        if (done) return PartyResult{0, "finished", script.bob_state()};
      }
    }
  } catch (const Exit& e) {
    return PartyResult{e.code, e.diagnostic, script.bob_state()};
  }
}

}  // namespace ghztp::net
