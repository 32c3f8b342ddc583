#include "ghztp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ghztp/net.hpp"
#include "ghztp/report_json.hpp"
#include "ghztp/verify.hpp"

namespace ghztp::cli {

namespace {

using nlohmann::json;
using protocol::SignalState;

constexpr double kRunThreshold = 1e-8;
constexpr double kSumTolerance = 1e-10;
constexpr double kSweepTolerance = 1e-10;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr double kProtectedMargin = 1e-4;
constexpr double kZLimit = 4.0;
// The random preset draws from a stream offset from the measurement seed.
constexpr std::uint64_t kSignalStream = 0x9E3779B97F4A7C15ULL;

struct UsageError {
  std::string message;
};

struct SignalOptions {
  std::vector<std::string> alpha;
  std::vector<std::string> beta;
  std::string preset;
};

struct Common {
  SignalOptions signal;
  std::uint64_t seed = 0;
  std::string format = "human";
};

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string fmt6(qsim::Complex c) {
  if (c.imag() == 0.0) return fmt6(c.real());
  return fmt6(c.real()) + (c.imag() < 0 ? "-" : "+") + fmt6(std::abs(c.imag())) + "i";
}

std::string shortest(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_real(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) {
    throw UsageError{"not a decimal number: '" + text + "'"};
  }
  return v;
}

void add_signal_options(CLI::App* app, SignalOptions& s) {
  app->add_option("--alpha", s.alpha, "Amplitude of |0> as RE IM")->expected(2);
  app->add_option("--beta", s.beta, "Amplitude of |1> as RE IM")->expected(2);
  app->add_option("--preset", s.preset, "Named signal (default: random)")
      ->check(CLI::IsMember({"zero", "one", "plus", "minus", "random"}));
}

void add_common(CLI::App* app, Common& c, bool with_format = true) {
  add_signal_options(app, c.signal);
  app->add_option("--seed", c.seed, "Measurement seed")->envname("GHZTP_SEED");
  if (with_format) {
    app->add_option("--format", c.format, "human or json")->check(CLI::IsMember({"human", "json"}));
  }
}

// Throws UsageError for conflicting flags, ValidationError for amplitudes
// that cannot be normalized.
SignalState resolve_signal(const SignalOptions& s, std::uint64_t seed) {
  const bool explicit_amps = !s.alpha.empty() || !s.beta.empty();
  if (explicit_amps && !s.preset.empty()) throw UsageError{"give amplitudes or --preset, not both"};
  if (explicit_amps) {
    if (s.alpha.size() != 2 || s.beta.size() != 2) throw UsageError{"--alpha and --beta go together"};
    return SignalState({parse_real(s.alpha[0]), parse_real(s.alpha[1])},
                       {parse_real(s.beta[0]), parse_real(s.beta[1])});
  }
  const double r = 1.0 / std::sqrt(2.0);
  if (s.preset == "zero") return SignalState(1.0, 0.0);
  if (s.preset == "one") return SignalState(0.0, 1.0);
  if (s.preset == "plus") return SignalState(r, r);
  if (s.preset == "minus") return SignalState(r, -r);
  qsim::Rng rng(seed + kSignalStream);
  return SignalState::random(rng);
}

void print_state(std::ostream& out, const char* label, const qsim::StateVector& s) {
  out << label << ": " << fmt6(s[0]) << " |0> + " << fmt6(s[1]) << " |1>\n";
}

// ---------- run ----------

struct RunArgs {
  Common common;
  std::string force_bell;
  std::string force_charlie;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const auto signal = resolve_signal(a.common.signal, a.common.seed);
  if (a.force_bell.empty() != a.force_charlie.empty()) {
    throw UsageError{"--force-bell and --force-charlie go together"};
  }
  protocol::RunPolicy policy = protocol::SeededPolicy{a.common.seed};
  if (!a.force_bell.empty()) {
    policy = protocol::ForcedPolicy{qsim::parse_bell_outcome(a.force_bell),
                                    qsim::parse_charlie_outcome(a.force_charlie)};
  }
  const auto result = protocol::run_protocol(signal, policy);
  const bool ok = result.fidelity >= 1.0 - kRunThreshold;
  if (a.common.format == "json") {
    out << to_json(result).dump(2) << "\n";
  } else {
    out << "signal: " << fmt6(signal.alpha()) << " |0> + " << fmt6(signal.beta()) << " |1>\n";
    out << "trace:\n";
    for (const auto& e : result.trace.events()) out << "  " << protocol::serialize_event(e) << "\n";
    print_state(out, "bob state", result.bob_state);
    out << "fidelity: " << fmt6(result.fidelity) << "\n";
    out << "path probability: " << fmt6(result.path_probability) << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

// ---------- enumerate ----------

int cmd_enumerate(const Common& c, std::ostream& out) {
  const auto signal = resolve_signal(c.signal, c.seed);
  const auto rows = verify::enumerate_branches(signal);
  double sum = 0.0;
  double min_fidelity = 1.0;
  for (const auto& r : rows) {
    sum += r.probability;
    min_fidelity = std::min(min_fidelity, r.bob_fidelity);
  }
  const bool ok = std::abs(sum - 1.0) <= kSumTolerance && min_fidelity >= 1.0 - kRunThreshold;
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    out << arr.dump(2) << "\n";
  } else {
    out << "bell      charlie  probability  fidelity\n";
    for (const auto& r : rows) {
      char line[96];
      std::snprintf(line, sizeof line, "%-9s %-8s %-12s %s\n",
                    std::string(qsim::to_string(r.bell)).c_str(),
                    std::string(qsim::to_string(r.charlie)).c_str(), fmt6(r.probability).c_str(),
                    fmt6(r.bob_fidelity).c_str());
      out << line;
    }
    out << "checksum: sum_p=" << fmt6(sum) << " min_fidelity=" << fmt6(min_fidelity) << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

// ---------- security ----------

struct SecurityArgs {
  Common common;
  int sweep = 0;
  bool sweep_given = false;
};

int cmd_sweep(const SecurityArgs& a, std::ostream& out) {
  if (a.sweep < 1) throw UsageError{"--sweep needs at least one sample"};
  const auto s = verify::security_sweep(a.sweep, a.common.seed);
  const double max_dev = std::max(s.max_bound_deviation, s.max_raw_fidelity_deviation);
  const bool ok = max_dev < kSweepTolerance && s.max_offdiagonal <= kOffDiagonalTolerance &&
                  (s.protected_samples == 0 || s.max_protected_bound < 1.0 - kProtectedMargin);
  if (a.common.format == "json") {
    out << to_json(s).dump(2) << "\n";
  } else {
    out << "samples: " << s.samples << " seed: " << s.seed << "\n";
    out << "max bound deviation: " << fmt6(s.max_bound_deviation) << "\n";
    out << "max raw fidelity deviation: " << fmt6(s.max_raw_fidelity_deviation) << "\n";
    out << "max off-diagonal: " << fmt6(s.max_offdiagonal) << "\n";
    out << "bound excess range: [" << fmt6(s.min_bound_excess) << ", " << fmt6(s.max_bound_excess)
        << "]\n";
    out << "protected samples: " << s.protected_samples
        << " max protected bound: " << fmt6(s.max_protected_bound) << "\n";
    out << "max deviation: " << fmt6(max_dev) << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_security(const SecurityArgs& a, std::ostream& out) {
  if (a.sweep_given) return cmd_sweep(a, out);
  const auto signal = resolve_signal(a.common.signal, a.common.seed);
  std::vector<verify::SecurityReport> reports;
  for (const auto bell : qsim::kBellOutcomes) reports.push_back(verify::bob_view_before_charlie(signal, bell));
  if (a.common.format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    out << arr.dump(2) << "\n";
    return kOk;
  }
  out << "bell      rho_bob[0][0]  rho_bob[1][1]  |rho_bob[0][1]|  raw_fidelity  unitary_bound\n";
  for (const auto& r : reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%-9s %-14s %-14s %-16s %-13s %s\n",
                  std::string(qsim::to_string(r.bell)).c_str(), fmt6(r.rho_bob.at(0, 0).real()).c_str(),
                  fmt6(r.rho_bob.at(1, 1).real()).c_str(), fmt6(std::abs(r.rho_bob.at(0, 1))).c_str(),
                  fmt6(r.raw_fidelity).c_str(), fmt6(r.unitary_bound).c_str());
    out << line;
  }
  const double pmin = std::min(std::norm(signal.alpha()), std::norm(signal.beta()));
  if (pmin <= verify::kProtectedThreshold) {
    out << "caveat: the signal is (close to) a basis state; Bob's diagonal view already "
           "reveals it, so Charlie's cooperation protects nothing\n";
  }
  return kOk;
}

// ---------- stats ----------

struct StatsArgs {
  Common common;
  long long n = 0;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  if (a.n < 1) throw UsageError{"stats needs a positive run count"};
  const auto signal = resolve_signal(a.common.signal, a.common.seed);
  std::array<long long, 4> bell{};
  std::array<long long, 2> charlie{};
  for (long long i = 0; i < a.n; ++i) {
    const auto r = protocol::run_protocol(
        signal, protocol::SeededPolicy{a.common.seed + static_cast<std::uint64_t>(i)});
    for (const auto& e : r.trace.events()) {
      if (const auto* b = std::get_if<protocol::event::BellMeasured>(&e)) ++bell[static_cast<int>(b->outcome)];
      if (const auto* c = std::get_if<protocol::event::CharlieMeasured>(&e)) ++charlie[static_cast<int>(c->outcome)];
    }
  }
  struct Row {
    std::string outcome;
    long long count;
    double expected;
    double z;
  };
  std::vector<Row> rows;
  const double n = static_cast<double>(a.n);
  auto add = [&](std::string_view name, long long count, double p) {
    const double z = (count - n * p) / std::sqrt(n * p * (1 - p));
    rows.push_back({std::string(name), count, p, z});
  };
  for (const auto o : qsim::kBellOutcomes) add(qsim::to_string(o), bell[static_cast<int>(o)], 0.25);
  for (const auto o : qsim::kCharlieOutcomes) add(qsim::to_string(o), charlie[static_cast<int>(o)], 0.5);
  const bool ok = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return std::abs(r.z) < kZLimit; });

  if (a.common.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back(json{{"outcome", r.outcome},
                         {"count", r.count},
                         {"frequency", r.count / n},
                         {"expected", r.expected},
                         {"z", r.z}});
    }
    out << json{{"runs", a.n}, {"seed", a.common.seed}, {"rows", arr}}.dump(2) << "\n";
  } else {
    out << "runs: " << a.n << " seed: " << a.common.seed << "\n";
    out << "outcome   count     frequency  expected  z\n";
    for (const auto& r : rows) {
      char line[128];
      std::snprintf(line, sizeof line, "%-9s %-9lld %-10s %-9s %s\n", r.outcome.c_str(), r.count,
                    fmt6(r.count / n).c_str(), fmt6(r.expected).c_str(), fmt6(r.z).c_str());
      out << line;
    }
  }
  return ok ? kOk : kCheckFailed;
}

// ---------- net ----------

struct NetArgs {
  Common common;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  long long timeout_ms = 30000;
  std::string port_file;
  std::string transcript;
  std::string role;
  bool die_before_measure = false;
  std::string drop;
  std::string work_dir;
  std::string exe = "/proc/self/exe";
};

void add_net_endpoint(CLI::App* app, NetArgs& a) {
  app->add_option("--host", a.host, "Coordinator address")->envname("GHZTP_HOST");
  app->add_option("--port", a.port, "Coordinator port (0: any free port)")->envname("GHZTP_PORT");
  app->add_option("--timeout-ms", a.timeout_ms, "Session timeout")->envname("GHZTP_TIMEOUT_MS");
}

int cmd_serve(const NetArgs& a, std::ostream& out, std::ostream& err) {
  net::ServeConfig cfg;
  cfg.host = a.host;
  cfg.port = a.port;
  cfg.seed = a.common.seed;
  cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
  if (!a.port_file.empty()) cfg.port_file = a.port_file;
  if (!a.transcript.empty()) cfg.transcript_file = a.transcript;
  try {
    const auto r = net::serve(cfg);
    if (r.stall) {
      err << net::stall_label(*r.stall) << "\n";
      return kStalled;
    }
    out << "session finished\n";
    return kOk;
  } catch (const net::ConnectionError& e) {
    err << "connection error: " << e.what() << "\n";
    return kConnection;
  }
}

int cmd_party(const NetArgs& a, std::ostream& out, std::ostream& err) {
  net::PartyConfig cfg;
  try {
    cfg.role = protocol::parse_role(a.role);
  } catch (const ValidationError& e) {
    throw UsageError{e.what()};
  }
  cfg.host = a.host;
  cfg.port = a.port;
  cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
  cfg.die_before_measure = a.die_before_measure;
  if (a.die_before_measure && cfg.role != protocol::Role::Charlie) {
    throw UsageError{"--die-before-measure is for Charlie"};
  }
  if (cfg.role == protocol::Role::Alice) cfg.signal = resolve_signal(a.common.signal, a.common.seed);
  const auto r = net::run_party(cfg);
  if (r.exit_code != 0) {
    err << protocol::to_string(cfg.role) << ": " << r.diagnostic << "\n";
    return r.exit_code;
  }
  if (r.bob_state) {
    out << "bob state: " << shortest(r.bob_state->amplitudes()[0].real()) << ","
        << shortest(r.bob_state->amplitudes()[0].imag()) << " "
        << shortest(r.bob_state->amplitudes()[1].real()) << ","
        << shortest(r.bob_state->amplitudes()[1].imag()) << "\n";
  }
  out << protocol::to_string(cfg.role) << ": finished\n";
  return kOk;
}

int cmd_orchestrate(const NetArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.drop.empty() && a.drop != "charlie") throw UsageError{"only charlie can be dropped"};
  net::OrchestrateConfig cfg;
  cfg.executable = a.exe == "/proc/self/exe" ? std::filesystem::read_symlink(a.exe)
                                              : std::filesystem::path(a.exe);
  cfg.signal = resolve_signal(a.common.signal, a.common.seed);
  cfg.seed = a.common.seed;
  cfg.host = a.host;
  cfg.port = a.port;
  cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
  cfg.drop_charlie = a.drop == "charlie";
  if (!a.work_dir.empty()) cfg.work_dir = a.work_dir;

  net::ComparisonReport r;
  try {
    r = net::orchestrate(cfg);
  } catch (const net::ConnectionError& e) {
    err << "connection error: " << e.what() << "\n";
    return kConnection;
  }

  if (a.common.format == "json") {
    json j = {{"match", r.match},
              {"trace_equal", r.trace_equal},
              {"phase_order_ok", r.phase_order_ok},
              {"fidelity_equal", r.fidelity_equal},
              {"fidelity", r.fidelity},
              {"reference_fidelity", r.reference_fidelity},
              {"party_exit_codes", r.party_exit_codes},
              {"transcript", r.transcript_path.string()},
              {"detail", r.detail}};
    if (r.bob_state) j["bob_state"] = state_to_json(*r.bob_state);
    if (r.stall) j["stalled"] = net::stall_label(*r.stall);
    out << j.dump(2) << "\n";
  } else {
    out << "match: " << (r.match ? "true" : "false") << "\n";
    out << "fidelity: " << fmt6(r.fidelity) << " (in-process " << fmt6(r.reference_fidelity)
        << ", identical: " << (r.fidelity_equal ? "yes" : "no") << ")\n";
    out << "trace equal: " << (r.trace_equal ? "yes" : "no")
        << ", phase order: " << (r.phase_order_ok ? "ok" : "violated") << "\n";
    if (r.bob_state) print_state(out, "bob state", *r.bob_state);
    if (r.stall) {
      out << net::stall_label(*r.stall) << " (waiting on";
      for (const auto role : r.stall->waiting_on) out << " " << protocol::to_string(role);
      out << "); Bob never finished\n";
    }
    out << "party exits: alice=" << r.party_exit_codes.at(0) << " bob=" << r.party_exit_codes.at(1)
        << " charlie=" << r.party_exit_codes.at(2) << "\n";
    out << "transcript: " << r.transcript_path.string() << "\n";
    if (!r.detail.empty() && !r.stall) out << "detail: " << r.detail << "\n";
  }
  if (r.stall) return kStalled;
  return r.match ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controlled teleportation over a GHZ state: simulate, verify, run over sockets."};
  app.name("ghztp");
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "One protocol run; exit 0 iff Bob's fidelity >= 1 - 1e-8");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--force-bell", run.force_bell, "PhiPlus|PhiMinus|PsiPlus|PsiMinus");
  run_cmd->add_option("--force-charlie", run.force_charlie, "Plus|Minus");

  Common enumerate;
  auto* enum_cmd = app.add_subcommand("enumerate", "All eight (Bell, Charlie) branches");
  add_common(enum_cmd, enumerate);

  SecurityArgs security;
  auto* sec_cmd = app.add_subcommand("security", "What Bob holds before Charlie reports");
  add_common(sec_cmd, security.common);
  auto* sweep_opt = sec_cmd->add_option("--sweep", security.sweep, "Check N random signals");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Outcome frequencies over N seeded runs");
  add_common(stats_cmd, stats.common);
  stats_cmd->add_option("n", stats.n, "Number of runs")->required();

  NetArgs netargs;
  auto* net_cmd = app.add_subcommand("net", "Networked run: coordinator plus three parties");
  net_cmd->require_subcommand(1);
  auto* serve_cmd = net_cmd->add_subcommand("serve", "Run the coordinator");
  add_net_endpoint(serve_cmd, netargs);
  serve_cmd->add_option("--seed", netargs.common.seed, "Measurement seed")->envname("GHZTP_SEED");
  serve_cmd->add_option("--port-file", netargs.port_file, "Write the bound port here");
  serve_cmd->add_option("--transcript", netargs.transcript, "Write the transcript here");
  auto* party_cmd = net_cmd->add_subcommand("party", "Run one party");
  add_net_endpoint(party_cmd, netargs);
  party_cmd->add_option("--role", netargs.role, "alice|bob|charlie")->required();
  add_signal_options(party_cmd, netargs.common.signal);
  party_cmd->add_option("--seed", netargs.common.seed, "Seed for the random preset")->envname("GHZTP_SEED");
  party_cmd->add_flag("--die-before-measure", netargs.die_before_measure,
                      "Charlie kills itself right before measuring (negative test)");
  auto* orch_cmd = net_cmd->add_subcommand("orchestrate", "Spawn all four processes and compare");
  add_net_endpoint(orch_cmd, netargs);
  add_common(orch_cmd, netargs.common);
  orch_cmd->add_option("--drop", netargs.drop, "Party to kill before its measurement (charlie)");
  orch_cmd->add_option("--work-dir", netargs.work_dir, "Transcript and log directory");
  orch_cmd->add_option("--exe", netargs.exe, "ghztp binary for the child processes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  security.sweep_given = sweep_opt->count() > 0;

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*enum_cmd) return cmd_enumerate(enumerate, out);
    if (*sec_cmd) return cmd_security(security, out);
    if (*stats_cmd) return cmd_stats(stats, out);
    if (*serve_cmd) return cmd_serve(netargs, out, err);
    if (*party_cmd) return cmd_party(netargs, out, err);
    if (*orch_cmd) return cmd_orchestrate(netargs, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.message << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const ImpossibleOutcomeError& e) {
    err << "impossible outcome: " << e.what() << "\n";
    return kImpossibleOutcome;
  }
  return kUsage;
}

}  // namespace ghztp::cli
