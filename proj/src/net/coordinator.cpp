#include <algorithm>
#include <charconv>
#include <string>

#include "ghztp/net.hpp"

namespace ghztp::net {

using nlohmann::json;
using protocol::Phase;

namespace {

constexpr Role kRoles[] = {Role::Alice, Role::Bob, Role::Charlie};

// Thrown inside request handling; turned into one Error frame.
struct Reject {
  std::string_view code;
  std::string message;
  bool close = false;
};

[[noreturn]] void malformed(std::string message) { throw Reject{code::kFrame, std::move(message), true}; }
[[noreturn]] void out_of_phase(std::string message) { throw Reject{code::kPhase, std::move(message), false}; }

const json& need(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end()) malformed(std::string("body lacks '") + key + "'");
  return *it;
}

std::string need_string(const json& body, const char* key) {
  const auto& v = need(body, key);
  if (!v.is_string()) malformed(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

qsim::Complex need_complex(const json& body, const char* key) {
  const auto& v = need(body, key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    malformed(std::string("'") + key + "' must be [re, im]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

template <class Parse>
auto parse_or_malformed(Parse parse, const std::string& text) {
  try {
    return parse(text);
  } catch (const ValidationError& e) {
    malformed(e.what());
  }
}

std::string shortest(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

json complex_json(qsim::Complex c) { return json::array({c.real(), c.imag()}); }

std::string join_roles(const std::vector<Role>& roles) {
  std::string s;
  for (const auto r : roles) {
    if (!s.empty()) s += ',';
    s += protocol::to_string(r);
  }
  return s;
}

}  // namespace

std::vector<int> owned_qubits(Role role) {
  switch (role) {
    case Role::Alice: return {0, 1};
    case Role::Bob: return {2};
    case Role::Charlie: return {3};
  }
  return {};
}

CoordinatorCore::CoordinatorCore(CoordinatorConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  meta("meta session id=" + config_.session_id + " seed=" + std::to_string(config_.seed));
}

bool CoordinatorCore::closed(int conn) const {
  if (conn < 0) return true;
  return static_cast<std::size_t>(conn) < conns_.size() && conns_[conn].closed;
}

std::string CoordinatorCore::transcript_text() const {
  std::string out;
  for (const auto& line : transcript_) {
    out += line;
    out += '\n';
  }
  return out;
}

void CoordinatorCore::meta(std::string line) { transcript_.push_back(std::move(line)); }

void CoordinatorCore::sync_trace() {
  if (!session_) return;
  const auto& events = session_->trace().events();
  for (; synced_events_ < events.size(); ++synced_events_) {
    transcript_.push_back(protocol::serialize_event(events[synced_events_]));
  }
}

std::optional<int> CoordinatorCore::conn_of(Role role) const {
  for (std::size_t i = 0; i < conns_.size(); ++i) {
    if (conns_[i].role == role && !conns_[i].closed) return static_cast<int>(i);
  }
  return std::nullopt;
}

Outgoing CoordinatorCore::frame(int conn, Kind kind, json body, bool close_after) {
  auto& seq = seq_out_[conn];
  return Outgoing{conn, WireMessage{++seq, config_.session_id, kind, std::move(body)}, close_after};
}

Outgoing CoordinatorCore::error(int conn, std::string_view code, std::string_view message,
                                bool close_after) {
  const auto& c = conns_[conn];
  meta("meta error role=" + std::string(c.role ? protocol::to_string(*c.role) : "-") +
       " code=" + std::string(code));
  auto out = frame(conn, Kind::Error, json{{"code", code}, {"message", message}}, close_after);
  if (close_after) {
    conns_[conn].closed = true;
    if (c.role && !finished_) departed_.push_back(*c.role);
  }
  return out;
}

std::vector<Outgoing> CoordinatorCore::on_line(int conn, std::string_view line) {
  if (conn < 0) return {};
  if (static_cast<std::size_t>(conn) >= conns_.size()) {
    conns_.resize(conn + 1);
    seq_out_.resize(conn + 1, 0);
  }
  if (conns_[conn].closed || finished_ || stall_) return {};

  std::vector<Outgoing> out;
  try {
    WireMessage m;
    try {
      m = decode(line);
    } catch (const FrameError& e) {
      malformed(e.what());
    }
    out = handle(conn, m);
  } catch (const Reject& r) {
    out.push_back(error(conn, r.code, r.message, r.close));
  } catch (const std::exception& e) {
    out.push_back(error(conn, code::kFrame, e.what(), true));
  }
  auto more = check_stall();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<Outgoing> CoordinatorCore::handle(int conn, const WireMessage& m) {
  auto& c = conns_[conn];
  if (m.seq <= c.last_seq_in) malformed("seq must increase");
  c.last_seq_in = m.seq;
  if (m.kind == Kind::Hello) return handle_hello(conn, m);
  if (!c.role) malformed("first frame must be Hello");
  if (m.session_id != config_.session_id) malformed("wrong session id");
  switch (m.kind) {
    case Kind::OpRequest:
      if (!granted_) out_of_phase("session not granted yet");
      return handle_op(conn, *c.role, m);
    case Kind::Classical:
      if (!granted_) out_of_phase("session not granted yet");
      return handle_classical(conn, *c.role, m);
    default: malformed(std::string(to_string(m.kind)) + " is not a party message");
  }
}

std::vector<Outgoing> CoordinatorCore::handle_hello(int conn, const WireMessage& m) {
  auto& c = conns_[conn];
  if (c.role) malformed("repeated Hello");
  if (!m.session_id.empty() && m.session_id != config_.session_id) malformed("wrong session id");
  const auto role = parse_or_malformed(protocol::parse_role, need_string(m.body, "role"));
  const bool taken = std::any_of(conns_.begin(), conns_.end(), [&](const Conn& o) {
    return o.role == role;
  });
  if (taken) {
    return {error(conn, code::kRoleTaken,
                  std::string(protocol::to_string(role)) + " is already connected", true)};
  }
  c.role = role;
  meta("meta connect role=" + std::string(protocol::to_string(role)));

  std::vector<Outgoing> out;
  const bool all = std::all_of(std::begin(kRoles), std::end(kRoles),
                               [&](Role r) { return conn_of(r).has_value(); });
  if (all) {
    granted_ = true;
    meta("meta grant");
    for (const auto r : kRoles) {
      out.push_back(frame(*conn_of(r), Kind::Grant,
                          json{{"role", protocol::to_string(r)}, {"qubits", owned_qubits(r)}}));
    }
  }
  return out;
}

std::vector<Outgoing> CoordinatorCore::handle_op(int conn, Role role, const WireMessage& m) {
  const auto op = need_string(m.body, "op");
  const auto& qjson = need(m.body, "qubits");
  if (!qjson.is_array()) malformed("'qubits' must be an array");
  std::vector<int> qubits;
  for (const auto& q : qjson) {
    if (!q.is_number_integer() || q.get<std::int64_t>() < 0 || q.get<std::int64_t>() > 3) {
      malformed("qubit indices are 0..3");
    }
    qubits.push_back(q.get<int>());
  }

  const auto owned = owned_qubits(role);
  for (const int q : qubits) {
    if (std::find(owned.begin(), owned.end(), q) == owned.end()) {
      meta("meta reject role=" + std::string(protocol::to_string(role)) + " op=" + op +
           " qubit=" + std::to_string(q));
      throw Reject{code::kLocality,
                   "locality violation: " + std::string(protocol::to_string(role)) +
                       " does not own qubit " + std::to_string(q),
                   false};
    }
  }
  auto expect = [&](std::vector<int> want) {
    if (qubits != want) out_of_phase(op + " does not act on the requested qubits");
  };
  const std::string role_name(protocol::to_string(role));
  auto result = [&](json body) {
    body["op"] = op;
    return frame(conn, Kind::OpResult, std::move(body));
  };
  auto session_call = [&](auto&& f) {
    if (!session_) out_of_phase("nothing prepared yet");
    try {
      f();
    } catch (const ProtocolOrderError& e) {
      out_of_phase(e.what());
    }
    sync_trace();
  };

  if (op == "prepare") {
    expect({0});
    const auto alpha = need_complex(m.body, "alpha");
    const auto beta = need_complex(m.body, "beta");
    if (session_) out_of_phase("already prepared");
    std::optional<protocol::SignalState> signal;
    try {
      signal.emplace(alpha, beta);
    } catch (const ValidationError& e) {
      malformed(e.what());
    }
    meta("meta op role=" + role_name + " op=prepare");
    session_.emplace(protocol::Session::compose(*signal));
    sync_trace();
    return {result(json::object())};
  }

  if (op == "bell_measure") {
    expect({0, 1});
    qsim::BellOutcome outcome{};
    meta("meta op role=" + role_name + " op=bell_measure");
    session_call([&] { outcome = session_->bell_measure(qsim::OutcomeSelector::sampled(rng_)); });
    const auto& e = std::get<protocol::event::BellMeasured>(session_->trace().events().back());
    return {result(json{{"outcome", qsim::to_string(outcome)}, {"probability", e.probability}})};
  }

  if (op == "apply_correction") {
    if (role == Role::Alice) out_of_phase("Alice applies no corrections");
    if (qubits.size() != 1) out_of_phase("corrections act on one qubit");
    const auto stage = need_string(m.body, "stage");
    const auto unitary = need_string(m.body, "unitary");
    const auto outcome_text = need_string(m.body, "outcome");
    if (stage == "bell") {
      const auto outcome = parse_or_malformed(qsim::parse_bell_outcome, outcome_text);
      const auto& entry = protocol::bell_correction(outcome);
      const auto& want = role == Role::Bob ? entry.bob.name : entry.charlie.name;
      if (unitary != want) {
        out_of_phase(unitary + " is not the " + role_name + " correction for " + outcome_text);
      }
      meta("meta op role=" + role_name + " op=apply_correction stage=bell");
      session_call([&] { session_->apply_bell_correction(role, outcome); });
      std::vector<Outgoing> out{result(json{{"applied", unitary}})};
      auto more = run_deferred();
      out.insert(out.end(), more.begin(), more.end());
      return out;
    }
    if (stage == "final") {
      expect({2});
      const auto outcome = parse_or_malformed(qsim::parse_charlie_outcome, outcome_text);
      if (unitary != protocol::charlie_correction(outcome).name) {
        out_of_phase(unitary + " is not the final correction for " + outcome_text);
      }
      meta("meta op role=" + role_name + " op=apply_correction stage=final");
      session_call([&] { session_->apply_final_correction(outcome); });
      return {result(json{{"applied", unitary}})};
    }
    malformed("'stage' must be bell or final");
  }

  if (op == "basis_measure") {
    expect({3});
    if (need_string(m.body, "basis") != "plus_minus") malformed("Charlie measures plus_minus");
    if (deferred_measure_) out_of_phase("a measurement is already pending");
    if (session_ && session_->phase() == Phase::BellMeasured && session_->bell_broadcast()) {
      meta("meta defer role=" + role_name + " op=basis_measure");
      deferred_measure_.emplace(conn, m);
      return {};
    }
    qsim::CharlieOutcome outcome{};
    meta("meta op role=" + role_name + " op=basis_measure");
    session_call(
        [&] { outcome = session_->charlie_measure(qsim::OutcomeSelector::sampled(rng_)); });
    const auto& e = std::get<protocol::event::CharlieMeasured>(session_->trace().events().back());
    return {result(json{{"outcome", qsim::to_string(outcome)}, {"probability", e.probability}})};
  }

  if (op == "fetch_bob_state") {
    expect({2});
    std::optional<qsim::StateVector> bob;
    meta("meta op role=" + role_name + " op=fetch_bob_state");
    session_call([&] { bob = session_->finish(); });
    json amps = json::array();
    std::string line = "meta bob_state";
    for (const auto a : bob->amplitudes()) {
      amps.push_back(complex_json(a));
      line += ' ' + shortest(a.real()) + ',' + shortest(a.imag());
    }
    meta(std::move(line));
    std::vector<Outgoing> out{
        result(json{{"state", amps}, {"fidelity", session_->final_fidelity()}})};
    finished_ = true;
    meta("meta finished");
    for (const auto r : kRoles) {
      if (const auto c = conn_of(r)) {
        out.push_back(frame(*c, Kind::Finish, json{{"fidelity", session_->final_fidelity()}}, true));
        conns_[*c].closed = true;
      }
    }
    return out;
  }

  malformed("unknown op '" + op + "'");
}

std::vector<Outgoing> CoordinatorCore::run_deferred() {
  if (!deferred_measure_ || !session_ || session_->phase() != Phase::Corrected) return {};
  const auto [conn, m] = std::move(*deferred_measure_);
  deferred_measure_.reset();
  if (closed(conn)) return {};
  meta("meta op role=Charlie op=basis_measure deferred=1");
  const auto outcome = session_->charlie_measure(qsim::OutcomeSelector::sampled(rng_));
  sync_trace();
  const auto& e = std::get<protocol::event::CharlieMeasured>(session_->trace().events().back());
  return {frame(conn, Kind::OpResult,
                json{{"op", "basis_measure"},
                     {"outcome", qsim::to_string(outcome)},
                     {"probability", e.probability}})};
}

std::vector<Outgoing> CoordinatorCore::handle_classical(int conn, Role role, const WireMessage& m) {
  (void)conn;
  const auto payload = need_string(m.body, "payload");
  const auto& to = need(m.body, "to");
  if (!to.is_array()) malformed("'to' must be an array");
  std::vector<Role> recipients;
  for (const auto& r : to) {
    if (!r.is_string()) malformed("'to' holds role names");
    recipients.push_back(parse_or_malformed(protocol::parse_role, r.get<std::string>()));
  }
  std::sort(recipients.begin(), recipients.end());
  if (!session_) out_of_phase("nothing prepared yet");

  std::vector<Outgoing> out;
  auto relay = [&](const protocol::ClassicalMessage& msg) {
    for (const auto r : msg.recipients) {
      const auto c = conn_of(r);
      if (!c) continue;
      meta("meta deliver msg_seq=" + std::to_string(msg.seq) +
           " to=" + std::string(protocol::to_string(r)));
      out.push_back(frame(*c, Kind::Classical,
                          json{{"from", protocol::to_string(msg.sender)},
                               {"msg_seq", msg.seq},
                               {"payload", payload}}));
    }
  };
  auto implicit = [&](Role who, std::string_view stage) {
    meta("meta implicit role=" + std::string(protocol::to_string(who)) + " stage=" +
         std::string(stage) + " unitary=I");
  };

  if (role == Role::Alice) {
    const auto outcome = parse_or_malformed(qsim::parse_bell_outcome, payload);
    if (recipients != std::vector<Role>{Role::Bob, Role::Charlie}) {
      out_of_phase("Alice broadcasts to Bob and Charlie");
    }
    if (session_->bell_outcome() && outcome != *session_->bell_outcome()) {
      out_of_phase("payload differs from the measured outcome");
    }
    std::optional<protocol::ClassicalMessage> msg;
    try {
      msg = session_->broadcast_bell();
    } catch (const ProtocolOrderError& e) {
      out_of_phase(e.what());
    }
    sync_trace();
    relay(*msg);
    const auto& entry = protocol::bell_correction(outcome);
    if (entry.bob.name == "I") {
      implicit(Role::Bob, "bell");
      session_->apply_bell_correction(Role::Bob, outcome);
    }
    if (entry.charlie.name == "I") {
      implicit(Role::Charlie, "bell");
      session_->apply_bell_correction(Role::Charlie, outcome);
    }
    sync_trace();
    return out;
  }

  if (role == Role::Charlie) {
    const auto outcome = parse_or_malformed(qsim::parse_charlie_outcome, payload);
    if (recipients != std::vector<Role>{Role::Bob}) out_of_phase("Charlie reports to Bob");
    if (session_->charlie_outcome() && outcome != *session_->charlie_outcome()) {
      out_of_phase("payload differs from the measured outcome");
    }
    std::optional<protocol::ClassicalMessage> msg;
    try {
      msg = session_->send_charlie_result();
    } catch (const ProtocolOrderError& e) {
      out_of_phase(e.what());
    }
    sync_trace();
    relay(*msg);
    if (protocol::charlie_correction(outcome).name == "I") {
      implicit(Role::Bob, "final");
      session_->apply_final_correction(outcome);
    }
    sync_trace();
    return out;
  }

  out_of_phase("Bob sends no classical messages");
}

std::vector<Role> CoordinatorCore::waiting_on() const {
  if (!granted_) {
    std::vector<Role> missing;
    for (const auto r : kRoles) {
      if (!conn_of(r)) missing.push_back(r);
    }
    return missing;
  }
  if (!session_) return {Role::Alice};
  const auto& s = *session_;
  switch (s.phase()) {
    case Phase::Init: return {Role::Alice};
    case Phase::BellMeasured: {
      if (!s.bell_broadcast()) return {Role::Alice};
      std::vector<Role> w;
      if (!s.bell_corrected(Role::Bob)) w.push_back(Role::Bob);
      if (!s.bell_corrected(Role::Charlie)) w.push_back(Role::Charlie);
      return w;
    }
    case Phase::Corrected: return {Role::Charlie};
    case Phase::CharlieMeasured: return {s.charlie_sent() ? Role::Bob : Role::Charlie};
    case Phase::Done: return {};
  }
  return {};
}

std::string CoordinatorCore::next_step() const {
  if (!granted_) return "Grant";
  if (!session_) return "Prepare";
  const auto& s = *session_;
  switch (s.phase()) {
    case Phase::Init: return "BellMeasure";
    case Phase::BellMeasured: return s.bell_broadcast() ? "BellCorrection" : "BellBroadcast";
    case Phase::Corrected: return "CharlieMeasure";
    case Phase::CharlieMeasured:
      if (!s.charlie_sent()) return "CharlieMessage";
      return s.final_corrected() ? "Finish" : "BobCorrection";
    case Phase::Done: return "";
  }
  return "";
}

std::vector<Outgoing> CoordinatorCore::check_stall() {
  if (finished_ || stall_ || departed_.empty()) return {};
  std::vector<Role> waiting;
  if (!granted_) {
    waiting = departed_;
  } else {
    waiting = waiting_on();
    const bool blocked = !waiting.empty() && std::all_of(waiting.begin(), waiting.end(), [&](Role r) {
      return std::find(departed_.begin(), departed_.end(), r) != departed_.end();
    });
    if (!blocked) return {};
  }
  return abort_all(Stall{next_step(), waiting, session_ ? session_->phase() : Phase::Init},
                   "departed");
}

std::vector<Outgoing> CoordinatorCore::abort_all(const Stall& stall, std::string_view reason) {
  stall_ = stall;
  meta("meta stalled step=" + stall.step + " waiting=" + join_roles(stall.waiting_on) +
       " reason=" + std::string(reason));
  std::vector<Outgoing> out;
  for (std::size_t i = 0; i < conns_.size(); ++i) {
    if (conns_[i].closed) continue;
    out.push_back(frame(static_cast<int>(i), Kind::Error,
                        json{{"code", code::kStalled}, {"message", stall_label(stall)}}, true));
    conns_[i].closed = true;
  }
  return out;
}

std::vector<Outgoing> CoordinatorCore::on_disconnect(int conn) {
  if (closed(conn) || static_cast<std::size_t>(conn) >= conns_.size()) return {};
  auto& c = conns_[conn];
  c.closed = true;
  if (!c.role || finished_ || stall_) return {};
  departed_.push_back(*c.role);
  meta("meta disconnect role=" + std::string(protocol::to_string(*c.role)));
  if (deferred_measure_ && deferred_measure_->first == conn) deferred_measure_.reset();
  return check_stall();
}

std::vector<Outgoing> CoordinatorCore::on_deadline() {
  if (finished_ || stall_) return {};
  return abort_all(Stall{next_step(), waiting_on(), session_ ? session_->phase() : Phase::Init},
                   "timeout");
}

std::string stall_label(const Stall& stall) { return "stalled-at-" + stall.step; }

}  // namespace ghztp::net
