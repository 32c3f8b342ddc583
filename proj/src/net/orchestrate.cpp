#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "ghztp/net.hpp"

extern char** environ;

namespace ghztp::net {

namespace {

using Clock = std::chrono::steady_clock;

std::string shortest(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

class Child {
 public:
  Child(const std::filesystem::path& exe, std::vector<std::string> args,
        const std::filesystem::path& log) {
    args.insert(args.begin(), exe.string());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, 1, 2);
    const int rc = posix_spawn(&pid_, exe.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw ConnectionError("cannot start " + exe.string());
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child() {
    if (!status_) {
      ::kill(pid_, SIGKILL);
      wait_until(Clock::now() + std::chrono::seconds(5));
    }
  }

  // Exit code, or 128 + signal, once reaped.
  std::optional<int> wait_until(Clock::time_point deadline) {
    while (!status_) {
      int st = 0;
      const pid_t r = ::waitpid(pid_, &st, WNOHANG);
      if (r == pid_) {
        status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
      } else if (Clock::now() >= deadline) {
        return std::nullopt;
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
    }
    return status_;
  }

  bool running() {
    if (status_) return false;
    int st = 0;
    if (::waitpid(pid_, &st, WNOHANG) == pid_) {
      status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
      return false;
    }
    return true;
  }

  void kill() {
    if (!status_) ::kill(pid_, SIGKILL);
  }

 private:
  pid_t pid_ = -1;
  std::optional<int> status_;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// "key=value" fields of a meta line.
std::optional<std::string> meta_field(std::string_view line, std::string_view key) {
  const std::string needle = " " + std::string(key) + "=";
  const auto pos = line.find(needle);
  if (pos == std::string_view::npos) return std::nullopt;
  auto rest = line.substr(pos + needle.size());
  return std::string(rest.substr(0, rest.find(' ')));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto p = s.find(sep);
    out.push_back(s.substr(0, p));
    if (p == std::string_view::npos) return out;
    s.remove_prefix(p + 1);
  }
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ValidationError("bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

protocol::ProtocolTrace canonical(const protocol::ProtocolTrace& trace) {
  using protocol::event::CorrectionApplied;
  auto events = trace.events();
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const auto* a = std::get_if<CorrectionApplied>(&events[i]);
    const auto* b = std::get_if<CorrectionApplied>(&events[i + 1]);
    // Only the Bell pair can appear as Charlie-then-Bob.
    if (a && b && a->role == Role::Charlie && b->role == Role::Bob) std::swap(events[i], events[i + 1]);
  }
  protocol::ProtocolTrace out;
  for (auto& e : events) out.append(std::move(e));
  return out;
}

ComparisonReport compare_transcript(std::string_view transcript,
                                    const protocol::SignalState& signal, std::uint64_t seed) {
  ComparisonReport report;
  const auto reference = protocol::run_protocol(signal, protocol::SeededPolicy{seed});
  report.reference_fidelity = reference.fidelity;

  protocol::ProtocolTrace trace;
  try {
    for (const auto line : split(transcript, '\n')) {
      if (line.starts_with("meta stalled ")) {
        Stall s;
        s.step = meta_field(line, "step").value_or("");
        for (const auto r : split(meta_field(line, "waiting").value_or(""), ',')) {
          if (!r.empty()) s.waiting_on.push_back(protocol::parse_role(r));
        }
        report.stall = s;
      } else if (line.starts_with("meta bob_state ")) {
        std::vector<qsim::Complex> amps;
        for (const auto tok : split(line.substr(15), ' ')) {
          const auto parts = split(tok, ',');
          if (parts.size() != 2) throw ValidationError("bad bob_state line");
          amps.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
        }
        report.bob_state = qsim::StateVector::from_amplitudes(std::move(amps));
      }
    }
    trace = protocol::ProtocolTrace::parse(transcript);
  } catch (const ValidationError& e) {
    report.detail = std::string("unreadable transcript: ") + e.what();
    return report;
  }
  if (report.stall) report.stall->reached = protocol::reached_phase(trace);

  const auto order = protocol::check_phase_order(trace);
  report.phase_order_ok = !order.has_value();
  report.trace_equal = canonical(trace).serialize() == canonical(reference.trace).serialize();
  const auto& events = trace.events();
  const auto* fin = events.empty() ? nullptr : std::get_if<protocol::event::Finished>(&events.back());
  if (fin) {
    report.fidelity = fin->fidelity;
    report.fidelity_equal = fin->fidelity == reference.fidelity;
  }
  report.match = report.trace_equal && report.phase_order_ok && report.fidelity_equal &&
                 !report.stall && report.bob_state.has_value() &&
                 *report.bob_state == reference.bob_state;

  if (report.stall) {
    report.detail = stall_label(*report.stall);
  } else if (order) {
    report.detail = "phase order: " + *order;
  } else if (!report.trace_equal) {
    report.detail = "networked trace differs from the in-process trace";
  } else if (!report.fidelity_equal) {
    report.detail = "final fidelity differs";
  } else if (!report.match) {
    report.detail = "Bob's state differs";
  }
  return report;
}

ComparisonReport orchestrate(const OrchestrateConfig& config) {
  std::filesystem::path dir;
  if (config.work_dir) {
    dir = *config.work_dir;
    std::filesystem::create_directories(dir);
  } else {
    std::string tmpl = (std::filesystem::temp_directory_path() / "ghztp-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw ConnectionError("cannot create a work directory");
    dir = tmpl;
  }
  const auto port_file = dir / "port";
  const auto transcript = dir / "transcript.txt";
  std::filesystem::remove(port_file);
  std::filesystem::remove(transcript);
  const auto timeout_ms = std::to_string(config.timeout.count());

  Child coordinator(config.executable,
                    {"net", "serve", "--host", config.host, "--port", std::to_string(config.port),
                     "--seed", std::to_string(config.seed), "--timeout-ms", timeout_ms,
                     "--port-file", port_file.string(), "--transcript", transcript.string()},
                    dir / "coordinator.log");

  std::string port;
  const auto start_deadline = Clock::now() + std::chrono::seconds(10);
  while (port.empty()) {
    if (std::filesystem::exists(port_file)) {
      port = read_file(port_file);
      while (!port.empty() && port.back() == '\n') port.pop_back();
    } else if (!coordinator.running() || Clock::now() >= start_deadline) {
      throw ConnectionError("coordinator did not start; see " + (dir / "coordinator.log").string());
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  const auto& s = config.signal;
  auto party_args = [&](std::string role) {
    return std::vector<std::string>{"net", "party", "--role", std::move(role), "--host",
                                    config.host, "--port", port, "--timeout-ms", timeout_ms};
  };
  auto alice_args = party_args("alice");
  alice_args.insert(alice_args.end(),
                    {"--alpha", shortest(s.alpha().real()), shortest(s.alpha().imag()), "--beta",
                     shortest(s.beta().real()), shortest(s.beta().imag())});
  auto charlie_args = party_args("charlie");
  if (config.drop_charlie) charlie_args.emplace_back("--die-before-measure");

  Child alice(config.executable, alice_args, dir / "alice.log");
  Child bob(config.executable, party_args("bob"), dir / "bob.log");
  Child charlie(config.executable, charlie_args, dir / "charlie.log");

  const auto deadline = Clock::now() + config.timeout + std::chrono::seconds(5);
  const auto coord_status = coordinator.wait_until(deadline);
  std::vector<int> codes;
  for (Child* c : {&alice, &bob, &charlie}) {
    const auto st = c->wait_until(deadline);
    if (!st) c->kill();
    codes.push_back(st.value_or(-1));
  }

  ComparisonReport report;
  if (!coord_status || !std::filesystem::exists(transcript)) {
    coordinator.kill();
    report.detail = "coordinator produced no transcript";
  } else {
    report = compare_transcript(read_file(transcript), config.signal, config.seed);
  }
  report.party_exit_codes = codes;
  report.transcript_path = transcript;
  return report;
}

}  // namespace ghztp::net
