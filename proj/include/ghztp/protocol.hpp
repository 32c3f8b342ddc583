#pragma once

// Three-party controlled teleportation over a shared GHZ state.
//
// Alice holds the signal qubit D and GHZ qubit A, Bob holds B, Charlie
// (the supervisor) holds C. Alice Bell-measures (D, A) and broadcasts the
// result; Bob and Charlie apply their halves of the Bell correction; Charlie
// measures C in the +/- basis and tells Bob, who applies the last correction.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ghztp/qsim.hpp"

namespace ghztp::protocol {

using qsim::BellOutcome;
using qsim::CharlieOutcome;
using qsim::Complex;
using qsim::StateVector;

enum class Role { Alice, Bob, Charlie };

// Register positions; also the qubit indices inside the session state.
enum class Qubit { D = 0, A = 1, B = 2, C = 3 };

constexpr int index(Qubit q) { return static_cast<int>(q); }

std::string_view to_string(Role role);
std::string_view to_string(Qubit qubit);
Role parse_role(std::string_view name);  // accepts "Alice" or "alice"
Role owner_of(Qubit qubit);

class SignalState {
 public:
  // Renormalizes within qsim::tol::kRenormalize, throws ValidationError
  // otherwise (including near-zero input).
  SignalState(Complex alpha, Complex beta);

  // Haar-random qubit from four Gaussian draws.
  static SignalState random(qsim::Rng& rng);

  Complex alpha() const { return alpha_; }
  Complex beta() const { return beta_; }

  friend bool operator==(const SignalState&, const SignalState&) = default;

 private:
  Complex alpha_;
  Complex beta_;
};

struct NamedUnitary {
  std::string name;
  qsim::Unitary2x2 matrix;
};

struct BellCorrection {
  NamedUnitary bob;      // acts on B
  NamedUnitary charlie;  // acts on C
};

const std::array<BellCorrection, 4>& bell_correction_table();
const std::array<NamedUnitary, 2>& charlie_correction_table();

const BellCorrection& bell_correction(BellOutcome outcome);
const NamedUnitary& charlie_correction(CharlieOutcome outcome);

using Payload = std::variant<BellOutcome, CharlieOutcome>;

struct ClassicalMessage {
  std::int64_t seq = 0;
  Role sender = Role::Alice;
  std::vector<Role> recipients;
  Payload payload;

  friend bool operator==(const ClassicalMessage&, const ClassicalMessage&) = default;
};

namespace event {
struct GhzPrepared {
  friend bool operator==(const GhzPrepared&, const GhzPrepared&) = default;
};
struct SignalPrepared {
  Complex alpha;
  Complex beta;
  friend bool operator==(const SignalPrepared&, const SignalPrepared&) = default;
};
struct BellMeasured {
  BellOutcome outcome;
  double probability;
  friend bool operator==(const BellMeasured&, const BellMeasured&) = default;
};
struct CorrectionApplied {
  Role role;
  Qubit qubit;
  std::string unitary;
  friend bool operator==(const CorrectionApplied&, const CorrectionApplied&) = default;
};
struct CharlieMeasured {
  CharlieOutcome outcome;
  double probability;
  friend bool operator==(const CharlieMeasured&, const CharlieMeasured&) = default;
};
struct BobCorrected {
  friend bool operator==(const BobCorrected&, const BobCorrected&) = default;
};
struct Finished {
  double fidelity;
  friend bool operator==(const Finished&, const Finished&) = default;
};
}  // namespace event

using TraceEvent =
    std::variant<event::GhzPrepared, event::SignalPrepared, event::BellMeasured,
                 event::CorrectionApplied, event::CharlieMeasured, event::BobCorrected,
                 event::Finished, ClassicalMessage>;

// Ordered record of one run. Serialized one event per line, stable field
// order, doubles in shortest round-trip form so that equal runs
// serialize byte-identically.
class ProtocolTrace {
 public:
  void append(TraceEvent e) { events_.push_back(std::move(e)); }
  const std::vector<TraceEvent>& events() const { return events_; }
  std::vector<ClassicalMessage> messages() const;

  std::string serialize() const;
  // Throws ValidationError on malformed lines. Lines starting with "meta "
  // are skipped.
  static ProtocolTrace parse(std::string_view text);

  friend bool operator==(const ProtocolTrace&, const ProtocolTrace&) = default;

 private:
  std::vector<TraceEvent> events_;
};

std::string serialize_event(const TraceEvent& e);
TraceEvent parse_event(std::string_view line);

// Empty when the trace respects the phase order (preparation, Bell
// measurement, Alice's broadcast, both Bell corrections, Charlie's
// measurement, Charlie's message, Bob's correction, finish) and every
// correction follows the message carrying its outcome. Otherwise a
// description of the first violation.
std::optional<std::string> check_phase_order(const ProtocolTrace& trace);

enum class Phase { Init, BellMeasured, Corrected, CharlieMeasured, Done };

std::string_view to_string(Phase phase);

// Furthest session phase a (possibly truncated) trace reached. Bell
// measurement counts only once broadcast; Charlie's measurement only once
// sent to Bob.
Phase reached_phase(const ProtocolTrace& trace);

// One protocol session: the four-qubit register plus an explicit phase.
// Out-of-order calls throw ProtocolOrderError and leave the session as it
// was.
class Session {
 public:
  // Signal (x) GHZ with D=0, A=1, B=2, C=3.
  static Session compose(const SignalState& signal);

  Phase phase() const { return phase_; }
  const StateVector& state() const { return state_; }
  const SignalState& signal() const { return signal_; }
  const ProtocolTrace& trace() const { return trace_; }
  double path_probability() const { return path_probability_; }
  std::optional<BellOutcome> bell_outcome() const { return bell_outcome_; }
  std::optional<CharlieOutcome> charlie_outcome() const { return charlie_outcome_; }
  bool bell_corrected(Role role) const;
  bool bell_broadcast() const { return bell_broadcast_; }
  bool charlie_sent() const { return charlie_sent_; }
  bool final_corrected() const { return final_corrected_; }

  // Alice's Bell measurement on (D, A). Init -> BellMeasured.
  BellOutcome bell_measure(const qsim::OutcomeSelector& selector);
  // Alice's broadcast of the Bell outcome to Bob and Charlie.
  ClassicalMessage broadcast_bell();

  // One party's half of the Bell correction; requires the broadcast. The
  // phase becomes Corrected once both halves are applied. Throws
  // ProtocolOrderError if `outcome` differs from the broadcast value.
  void apply_bell_correction(Role role, BellOutcome outcome);

  // Charlie's +/- measurement of C. Corrected -> CharlieMeasured.
  CharlieOutcome charlie_measure(const qsim::OutcomeSelector& selector);
  ClassicalMessage send_charlie_result();

  // Bob's final correction on B; requires Charlie's message.
  void apply_final_correction(CharlieOutcome outcome);
  // Records the final fidelity and returns Bob's qubit. -> Done.
  StateVector finish();

  double final_fidelity() const { return final_fidelity_; }

 private:
  Session(SignalState signal, StateVector state);

  ClassicalMessage emit(Role sender, std::vector<Role> recipients, Payload payload);
  void require(bool condition, std::string_view what) const;

  SignalState signal_;
  StateVector state_;
  Phase phase_ = Phase::Init;
  ProtocolTrace trace_;
  std::int64_t next_seq_ = 1;
  double path_probability_ = 1.0;
  std::optional<BellOutcome> bell_outcome_;
  std::optional<CharlieOutcome> charlie_outcome_;
  bool bell_broadcast_ = false;
  bool bob_bell_corrected_ = false;
  bool charlie_bell_corrected_ = false;
  bool charlie_sent_ = false;
  bool final_corrected_ = false;
  double final_fidelity_ = 0.0;
};

StateVector prepare_ghz();
StateVector prepare_signal(const SignalState& signal);
Session compose_session(const SignalState& signal);

struct BellStep {
  BellOutcome outcome;
  double probability;
  ClassicalMessage message;
};

struct CharlieStep {
  CharlieOutcome outcome;
  double probability;
  ClassicalMessage message;
};

BellStep alice_bell_measure(Session& session, const qsim::OutcomeSelector& selector);
// Bob's and then Charlie's half of the Bell correction.
void apply_bell_correction(Session& session, BellOutcome outcome);
CharlieStep charlie_measure(Session& session, const qsim::OutcomeSelector& selector);
// Final correction plus finish; returns Bob's qubit.
StateVector bob_correct(Session& session, CharlieOutcome outcome);

struct SeededPolicy {
  std::uint64_t seed;
};
struct ForcedPolicy {
  BellOutcome bell;
  CharlieOutcome charlie;
};
using RunPolicy = std::variant<SeededPolicy, ForcedPolicy>;

struct ProtocolResult {
  ProtocolTrace trace;
  StateVector bob_state;
  double fidelity;
  // product of the Born probabilities of the realized branch
  double path_probability;

  friend bool operator==(const ProtocolResult&, const ProtocolResult&) = default;
};

ProtocolResult run_protocol(const SignalState& signal, const RunPolicy& policy);

}  // namespace ghztp::protocol
