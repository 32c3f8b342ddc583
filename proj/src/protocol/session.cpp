#include <cmath>
#include <random>
#include <string>

#include "ghztp/protocol.hpp"

namespace ghztp::protocol {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Alice: return "Alice";
    case Role::Bob: return "Bob";
    case Role::Charlie: return "Charlie";
  }
  return "?";
}

std::string_view to_string(Qubit qubit) {
  static constexpr std::string_view names[] = {"D", "A", "B", "C"};
  return names[index(qubit)];
}

Role parse_role(std::string_view name) {
  if (name == "Alice" || name == "alice") return Role::Alice;
  if (name == "Bob" || name == "bob") return Role::Bob;
  if (name == "Charlie" || name == "charlie") return Role::Charlie;
  throw ValidationError("unknown role '" + std::string(name) + "'");
}

Role owner_of(Qubit qubit) {
  switch (qubit) {
    case Qubit::D:
    case Qubit::A: return Role::Alice;
    case Qubit::B: return Role::Bob;
    case Qubit::C: return Role::Charlie;
  }
  throw DomainError("unknown qubit");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Init: return "Init";
    case Phase::BellMeasured: return "BellMeasured";
    case Phase::Corrected: return "Corrected";
    case Phase::CharlieMeasured: return "CharlieMeasured";
    case Phase::Done: return "Done";
  }
  return "?";
}

SignalState::SignalState(Complex alpha, Complex beta) {
  const auto v = StateVector::from_amplitudes({alpha, beta});
  alpha_ = v[0];
  beta_ = v[1];
}

SignalState SignalState::random(qsim::Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const Complex a(gauss(rng), gauss(rng));
    const Complex b(gauss(rng), gauss(rng));
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    if (norm > 1e-6) return SignalState(a / norm, b / norm);
  }
}

const std::array<BellCorrection, 4>& bell_correction_table() {
  static const std::array<BellCorrection, 4> table = {{
      {{"I", qsim::gates::identity()}, {"I", qsim::gates::identity()}},
      {{"I", qsim::gates::identity()}, {"Z", qsim::gates::pauli_z()}},
      {{"X", qsim::gates::pauli_x()}, {"X", qsim::gates::pauli_x()}},
      {{"X", qsim::gates::pauli_x()}, {"ZX", qsim::gates::z_times_x()}},
  }};
  return table;
}

const std::array<NamedUnitary, 2>& charlie_correction_table() {
  static const std::array<NamedUnitary, 2> table = {{
      {"I", qsim::gates::identity()},
      {"Z", qsim::gates::pauli_z()},
  }};
  return table;
}

const BellCorrection& bell_correction(BellOutcome outcome) {
  return bell_correction_table()[static_cast<std::size_t>(outcome)];
}

const NamedUnitary& charlie_correction(CharlieOutcome outcome) {
  return charlie_correction_table()[static_cast<std::size_t>(outcome)];
}

StateVector prepare_ghz() {
  auto s = qsim::new_basis_state(3, 0);
  s = qsim::apply_single(std::move(s), 0, qsim::gates::hadamard());
  s = qsim::apply_two(std::move(s), 0, 1, qsim::gates::cnot());
  s = qsim::apply_two(std::move(s), 0, 2, qsim::gates::cnot());
  return s;
}

StateVector prepare_signal(const SignalState& signal) {
  return StateVector::from_amplitudes({signal.alpha(), signal.beta()});
}

Session::Session(SignalState signal, StateVector state)
    : signal_(signal), state_(std::move(state)) {}

Session Session::compose(const SignalState& signal) {
  auto ghz = prepare_ghz();
  auto d = prepare_signal(signal);
  Session s(signal, qsim::tensor(d, ghz));
  s.trace_.append(event::GhzPrepared{});
  s.trace_.append(event::SignalPrepared{signal.alpha(), signal.beta()});
  return s;
}

Session compose_session(const SignalState& signal) { return Session::compose(signal); }

void Session::require(bool condition, std::string_view what) const {
  if (!condition) {
    throw ProtocolOrderError(std::string(what) + " (session phase " +
                             std::string(to_string(phase_)) + ")");
  }
}

bool Session::bell_corrected(Role role) const {
  switch (role) {
    case Role::Bob: return bob_bell_corrected_;
    case Role::Charlie: return charlie_bell_corrected_;
    case Role::Alice: return bell_outcome_.has_value();
  }
  return false;
}

ClassicalMessage Session::emit(Role sender, std::vector<Role> recipients, Payload payload) {
  ClassicalMessage m{next_seq_++, sender, std::move(recipients), payload};
  trace_.append(m);
  return m;
}

BellOutcome Session::bell_measure(const qsim::OutcomeSelector& selector) {
  require(phase_ == Phase::Init, "Bell measurement already performed");
  auto m = qsim::measure_bell(state_, index(Qubit::D), index(Qubit::A), selector);
  state_ = std::move(m.post_state);
  path_probability_ *= m.probability;
  bell_outcome_ = m.outcome;
  phase_ = Phase::BellMeasured;
  trace_.append(event::BellMeasured{m.outcome, m.probability});
  return m.outcome;
}

ClassicalMessage Session::broadcast_bell() {
  require(phase_ == Phase::BellMeasured && !bell_broadcast_,
          "Bell broadcast needs a fresh Bell measurement");
  bell_broadcast_ = true;
  return emit(Role::Alice, {Role::Bob, Role::Charlie}, *bell_outcome_);
}

void Session::apply_bell_correction(Role role, BellOutcome outcome) {
  require(role != Role::Alice, "Alice has no Bell correction");
  require(phase_ == Phase::BellMeasured && bell_broadcast_,
          "Bell correction needs Alice's broadcast");
  require(outcome == *bell_outcome_, "Bell correction outcome differs from the broadcast");
  const auto& entry = bell_correction(outcome);
  if (role == Role::Bob) {
    require(!bob_bell_corrected_, "Bob's Bell correction already applied");
    state_ = qsim::apply_single(std::move(state_), index(Qubit::B), entry.bob.matrix);
    bob_bell_corrected_ = true;
    trace_.append(event::CorrectionApplied{Role::Bob, Qubit::B, entry.bob.name});
  } else {
    require(!charlie_bell_corrected_, "Charlie's Bell correction already applied");
    state_ = qsim::apply_single(std::move(state_), index(Qubit::C), entry.charlie.matrix);
    charlie_bell_corrected_ = true;
    trace_.append(event::CorrectionApplied{Role::Charlie, Qubit::C, entry.charlie.name});
  }
  if (bob_bell_corrected_ && charlie_bell_corrected_) phase_ = Phase::Corrected;
}

CharlieOutcome Session::charlie_measure(const qsim::OutcomeSelector& selector) {
  require(phase_ == Phase::Corrected, "Charlie measures only after both Bell corrections");
  auto m = qsim::measure_in_basis(state_, index(Qubit::C), qsim::MeasurementBasis::plus_minus(),
                                  selector);
  state_ = std::move(m.post_state);
  path_probability_ *= m.probability;
  charlie_outcome_ = static_cast<CharlieOutcome>(m.outcome);
  phase_ = Phase::CharlieMeasured;
  trace_.append(event::CharlieMeasured{*charlie_outcome_, m.probability});
  return *charlie_outcome_;
}

ClassicalMessage Session::send_charlie_result() {
  require(phase_ == Phase::CharlieMeasured && !charlie_sent_,
          "Charlie's message needs a fresh Charlie measurement");
  charlie_sent_ = true;
  return emit(Role::Charlie, {Role::Bob}, *charlie_outcome_);
}

void Session::apply_final_correction(CharlieOutcome outcome) {
  require(phase_ == Phase::CharlieMeasured && charlie_sent_ && !final_corrected_,
          "Bob's final correction needs Charlie's message");
  require(outcome == *charlie_outcome_, "final correction outcome differs from Charlie's message");
  const auto& u = charlie_correction(outcome);
  state_ = qsim::apply_single(std::move(state_), index(Qubit::B), u.matrix);
  final_corrected_ = true;
  trace_.append(event::CorrectionApplied{Role::Bob, Qubit::B, u.name});
  trace_.append(event::BobCorrected{});
}

StateVector Session::finish() {
  require(phase_ == Phase::CharlieMeasured && final_corrected_,
          "finish needs Bob's final correction");
  const std::array<int, 1> keep = {index(Qubit::B)};
  final_fidelity_ = qsim::fidelity_pure(qsim::partial_trace(state_, keep), prepare_signal(signal_));
  phase_ = Phase::Done;
  trace_.append(event::Finished{final_fidelity_});
  return qsim::extract_qubit(state_, index(Qubit::B));
}

BellStep alice_bell_measure(Session& session, const qsim::OutcomeSelector& selector) {
  const auto outcome = session.bell_measure(selector);
  const double p = std::get<event::BellMeasured>(session.trace().events().back()).probability;
  return BellStep{outcome, p, session.broadcast_bell()};
}

void apply_bell_correction(Session& session, BellOutcome outcome) {
  session.apply_bell_correction(Role::Bob, outcome);
  session.apply_bell_correction(Role::Charlie, outcome);
}

CharlieStep charlie_measure(Session& session, const qsim::OutcomeSelector& selector) {
  const auto outcome = session.charlie_measure(selector);
  const double p = std::get<event::CharlieMeasured>(session.trace().events().back()).probability;
  return CharlieStep{outcome, p, session.send_charlie_result()};
}

StateVector bob_correct(Session& session, CharlieOutcome outcome) {
  session.apply_final_correction(outcome);
  return session.finish();
}

ProtocolResult run_protocol(const SignalState& signal, const RunPolicy& policy) {
  auto session = Session::compose(signal);
  qsim::Rng rng;
  std::optional<ForcedPolicy> forced;
  if (const auto* seeded = std::get_if<SeededPolicy>(&policy)) {
    rng.seed(seeded->seed);
  } else {
    forced = std::get<ForcedPolicy>(policy);
  }
  auto selector = [&](int forced_outcome) {
    return forced ? qsim::OutcomeSelector::forced(forced_outcome)
                  : qsim::OutcomeSelector::sampled(rng);
  };

  const auto bell = alice_bell_measure(
      session, selector(forced ? static_cast<int>(forced->bell) : 0));
  apply_bell_correction(session, bell.outcome);
  const auto charlie = charlie_measure(
      session, selector(forced ? static_cast<int>(forced->charlie) : 0));
  auto bob_state = bob_correct(session, charlie.outcome);
  return ProtocolResult{session.trace(), std::move(bob_state), session.final_fidelity(),
                        session.path_probability()};
}

}  // namespace ghztp::protocol
