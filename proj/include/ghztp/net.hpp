#pragma once

// Networked run of the protocol. A coordinator process owns the only
// StateVector; Alice, Bob and Charlie are separate processes that act on it
// through OpRequests restricted to the qubits they own, and talk to each
// other through Classical frames relayed by the coordinator.
//
// Body shapes (all frames carry seq, session, kind, body):
//   Hello      party -> coord   {"role":"Bob"}
//   Grant      coord -> party   {"role":"Bob","qubits":[2]}   sent once all three said Hello
//   OpRequest  party -> coord   {"op":..., "qubits":[...], ...op fields}
//       prepare          Alice [0]    "alpha":[re,im], "beta":[re,im]
//       bell_measure     Alice [0,1]
//       apply_correction Bob [2] | Charlie [3]
//                        "stage":"bell"|"final", "outcome":..., "unitary":"X"
//       basis_measure    Charlie [3]  "basis":"plus_minus"
//       fetch_bob_state  Bob [2]
//   OpResult   coord -> party   {"op":..., ...result fields}
//   Classical  party -> coord   {"to":["Bob","Charlie"],"payload":"PhiMinus"}
//              coord -> party   {"from":"Alice","msg_seq":1,"payload":"PhiMinus"}
//   Finish     coord -> party   {"fidelity":f}
//   Error      coord -> party   {"code":"ERR_...","message":"..."}
//
// Identity corrections never cross the wire: the coordinator applies them
// when it relays the message they are conditioned on.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ghztp/protocol.hpp"
#include "ghztp/wire.hpp"

namespace ghztp::net {

using protocol::Role;

// Alice {D, A}, Bob {B}, Charlie {C}; fixed for every session.
std::vector<int> owned_qubits(Role role);

struct CoordinatorConfig {
  std::uint64_t seed = 0;
  std::string session_id = "ghztp";
};

struct Outgoing {
  int conn;
  WireMessage message;
  bool close_after = false;
};

struct Stall {
  // Next protocol step that never happened, e.g. "CharlieMeasure".
  std::string step;
  std::vector<Role> waiting_on;
  protocol::Phase reached;
};

// The coordinator's state machine with no I/O. Connections are opaque
// integers chosen by the caller; every call returns the frames to send.
// Never throws on peer input.
class CoordinatorCore {
 public:
  explicit CoordinatorCore(CoordinatorConfig config);

  std::vector<Outgoing> on_line(int conn, std::string_view line);
  std::vector<Outgoing> on_disconnect(int conn);
  std::vector<Outgoing> on_deadline();

  bool finished() const { return finished_; }
  const std::optional<Stall>& stall() const { return stall_; }
  // Unknown connections are open.
  bool closed(int conn) const;
  // Null until Alice's prepare.
  const protocol::Session* session() const { return session_ ? &*session_ : nullptr; }

  // Serialized trace interleaved with "meta ..." lines.
  const std::vector<std::string>& transcript() const { return transcript_; }
  std::string transcript_text() const;

 private:
  struct Conn {
    std::optional<Role> role;
    std::int64_t last_seq_in = 0;
    bool closed = false;
  };

  std::vector<Outgoing> handle(int conn, const WireMessage& m);
  std::vector<Outgoing> handle_hello(int conn, const WireMessage& m);
  std::vector<Outgoing> handle_op(int conn, Role role, const WireMessage& m);
  std::vector<Outgoing> handle_classical(int conn, Role role, const WireMessage& m);
  std::vector<Outgoing> run_deferred();
  std::vector<Outgoing> check_stall();
  std::vector<Outgoing> abort_all(const Stall& stall, std::string_view reason);

  Outgoing frame(int conn, Kind kind, nlohmann::json body, bool close_after = false);
  Outgoing error(int conn, std::string_view code, std::string_view message, bool close_after);
  std::optional<int> conn_of(Role role) const;
  std::vector<Role> waiting_on() const;
  std::string next_step() const;
  void meta(std::string line);
  void sync_trace();

  CoordinatorConfig config_;
  qsim::Rng rng_;
  std::vector<Conn> conns_;
  std::vector<std::int64_t> seq_out_;
  bool granted_ = false;
  std::optional<protocol::Session> session_;
  std::size_t synced_events_ = 0;
  // Charlie's basis_measure, held until both Bell corrections are in.
  std::optional<std::pair<int, WireMessage>> deferred_measure_;
  std::vector<Role> departed_;
  bool finished_ = false;
  std::optional<Stall> stall_;
  std::vector<std::string> transcript_;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  std::uint64_t seed = 0;
  std::chrono::milliseconds timeout{30000};
  std::optional<std::filesystem::path> port_file;
  std::optional<std::filesystem::path> transcript_file;
};

struct ServeResult {
  bool finished = false;
  std::optional<Stall> stall;
  std::string transcript;
};

// Binds, accepts the three parties, runs the session to completion or
// stall, writes the transcript. Throws ConnectionError if it cannot bind.
ServeResult serve(const ServeConfig& config);

class ConnectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PartyConfig {
  Role role = Role::Alice;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds connect_timeout{2000};
  // Alice only.
  std::optional<protocol::SignalState> signal;
  // Charlie only: SIGKILL itself right before its measurement.
  bool die_before_measure = false;
};

struct PartyResult {
  // 0 finished, 1 protocol error, 4 connection failure or loss, 5 stalled.
  int exit_code = 0;
  std::string diagnostic;
  // Bob only, once finished.
  std::optional<qsim::StateVector> bob_state;
};

PartyResult run_party(const PartyConfig& config);

struct OrchestrateConfig {
  // Binary that understands `net serve` and `net party`.
  std::filesystem::path executable;
  protocol::SignalState signal{1.0, 0.0};
  std::uint64_t seed = 0;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::chrono::milliseconds timeout{30000};
  bool drop_charlie = false;
  // Transcript and child logs go here; a fresh temporary directory if unset.
  std::optional<std::filesystem::path> work_dir;
};

struct ComparisonReport {
  bool match = false;
  bool trace_equal = false;
  bool phase_order_ok = false;
  bool fidelity_equal = false;
  double fidelity = 0.0;
  double reference_fidelity = 0.0;
  std::optional<qsim::StateVector> bob_state;
  std::optional<Stall> stall;
  // alice, bob, charlie
  std::vector<int> party_exit_codes;
  std::string detail;
  std::filesystem::path transcript_path;
};

// Same runs with the two Bell-correction lines in Bob, Charlie order (the
// only place a networked run may legitimately interleave differently).
protocol::ProtocolTrace canonical(const protocol::ProtocolTrace& trace);

// Compares a networked transcript against run_protocol with the same seed.
ComparisonReport compare_transcript(std::string_view transcript,
                                    const protocol::SignalState& signal, std::uint64_t seed);

// Throws ConnectionError if the coordinator never comes up.
ComparisonReport orchestrate(const OrchestrateConfig& config);

std::string stall_label(const Stall& stall);  // "stalled-at-CharlieMeasure"

}  // namespace ghztp::net
