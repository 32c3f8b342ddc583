#include <charconv>
#include <map>
#include <sstream>

#include "ghztp/protocol.hpp"

namespace ghztp::protocol {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("bad number '" + std::string(s) + "' in trace");
  }
  return v;
}

std::string format_complex(Complex c) {
  return format_double(c.real()) + "," + format_double(c.imag());
}

Complex parse_complex(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw ValidationError("bad complex '" + std::string(s) + "'");
  return {parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1))};
}

std::string payload_name(const Payload& p) {
  return std::visit([](auto o) { return std::string(qsim::to_string(o)); }, p);
}

Payload parse_payload(std::string_view s) {
  for (auto o : qsim::kBellOutcomes) {
    if (qsim::to_string(o) == s) return o;
  }
  return qsim::parse_charlie_outcome(s);
}

Qubit parse_qubit(std::string_view s) {
  for (Qubit q : {Qubit::D, Qubit::A, Qubit::B, Qubit::C}) {
    if (to_string(q) == s) return q;
  }
  throw ValidationError("unknown qubit '" + std::string(s) + "'");
}

struct Line {
  std::string tag;
  std::map<std::string, std::string, std::less<>> fields;

  const std::string& get(std::string_view key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ValidationError(tag + " line lacks field '" + std::string(key) + "'");
    return it->second;
  }
};

Line split(std::string_view text) {
  Line line;
  std::istringstream in{std::string(text)};
  std::string token;
  in >> line.tag;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ValidationError("malformed trace field '" + token + "'");
    line.fields.emplace(token.substr(0, eq), token.substr(eq + 1));
  }
  return line;
}

struct Serializer {
  std::string operator()(const event::GhzPrepared&) const { return "GhzPrepared"; }
  std::string operator()(const event::SignalPrepared& e) const {
    return "SignalPrepared alpha=" + format_complex(e.alpha) + " beta=" + format_complex(e.beta);
  }
  std::string operator()(const event::BellMeasured& e) const {
    return "BellMeasured outcome=" + std::string(qsim::to_string(e.outcome)) +
           " probability=" + format_double(e.probability);
  }
  std::string operator()(const event::CorrectionApplied& e) const {
    return "CorrectionApplied role=" + std::string(to_string(e.role)) +
           " qubit=" + std::string(to_string(e.qubit)) + " unitary=" + e.unitary;
  }
  std::string operator()(const event::CharlieMeasured& e) const {
    return "CharlieMeasured outcome=" + std::string(qsim::to_string(e.outcome)) +
           " probability=" + format_double(e.probability);
  }
  std::string operator()(const event::BobCorrected&) const { return "BobCorrected"; }
  std::string operator()(const event::Finished& e) const {
    return "Finished fidelity=" + format_double(e.fidelity);
  }
  std::string operator()(const ClassicalMessage& m) const {
    std::string to;
    for (std::size_t i = 0; i < m.recipients.size(); ++i) {
      if (i) to += ",";
      to += to_string(m.recipients[i]);
    }
    return "Message seq=" + std::to_string(m.seq) + " from=" + std::string(to_string(m.sender)) +
           " to=" + to + " payload=" + payload_name(m.payload);
  }
};

}  // namespace

std::string serialize_event(const TraceEvent& e) { return std::visit(Serializer{}, e); }

TraceEvent parse_event(std::string_view text) {
  const Line line = split(text);
  if (line.tag == "GhzPrepared") return event::GhzPrepared{};
  if (line.tag == "SignalPrepared") {
    return event::SignalPrepared{parse_complex(line.get("alpha")), parse_complex(line.get("beta"))};
  }
  if (line.tag == "BellMeasured") {
    return event::BellMeasured{qsim::parse_bell_outcome(line.get("outcome")),
                               parse_double(line.get("probability"))};
  }
  if (line.tag == "CorrectionApplied") {
    return event::CorrectionApplied{parse_role(line.get("role")), parse_qubit(line.get("qubit")),
                                    line.get("unitary")};
  }
  if (line.tag == "CharlieMeasured") {
    return event::CharlieMeasured{qsim::parse_charlie_outcome(line.get("outcome")),
                                  parse_double(line.get("probability"))};
  }
  if (line.tag == "BobCorrected") return event::BobCorrected{};
  if (line.tag == "Finished") return event::Finished{parse_double(line.get("fidelity"))};
  if (line.tag == "Message") {
    ClassicalMessage m;
    const auto& seq = line.get("seq");
    const auto res = std::from_chars(seq.data(), seq.data() + seq.size(), m.seq);
    if (res.ec != std::errc{} || res.ptr != seq.data() + seq.size()) {
      throw ValidationError("bad message seq '" + seq + "'");
    }
    m.sender = parse_role(line.get("from"));
    std::string_view to = line.get("to");
    while (!to.empty()) {
      const auto comma = to.find(',');
      m.recipients.push_back(parse_role(to.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      to.remove_prefix(comma + 1);
    }
    m.payload = parse_payload(line.get("payload"));
    return m;
  }
  throw ValidationError("unknown trace event '" + line.tag + "'");
}

std::vector<ClassicalMessage> ProtocolTrace::messages() const {
  std::vector<ClassicalMessage> out;
  for (const auto& e : events_) {
    if (const auto* m = std::get_if<ClassicalMessage>(&e)) out.push_back(*m);
  }
  return out;
}

std::string ProtocolTrace::serialize() const {
  std::string out;
  for (const auto& e : events_) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

ProtocolTrace ProtocolTrace::parse(std::string_view text) {
  ProtocolTrace trace;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty() || line.starts_with("meta ")) continue;
    trace.append(parse_event(line));
  }
  return trace;
}

namespace {

// Walks the trace through the fixed step sequence; stops at the first
// violation.
struct PhaseWalk {
  int step = 0;  // number of completed protocol steps, 0..11
  std::optional<std::string> error;
  std::optional<BellOutcome> bell;
  std::optional<CharlieOutcome> charlie;
  bool bob_bell = false;
  bool charlie_bell = false;
  std::int64_t last_seq = 0;
};

PhaseWalk walk(const ProtocolTrace& trace) {
  PhaseWalk w;
  auto fail = [&](std::size_t i, const std::string& why) {
    w.error = "event " + std::to_string(i) + " (" + serialize_event(trace.events()[i]) + "): " + why;
  };
  const auto& events = trace.events();
  for (std::size_t i = 0; i < events.size() && !w.error; ++i) {
    const auto& e = events[i];
    if (const auto* m = std::get_if<ClassicalMessage>(&e)) {
      if (m->seq <= w.last_seq) {
        fail(i, "message seq not increasing");
        break;
      }
      w.last_seq = m->seq;
    }
    switch (w.step) {
      case 0:
        if (!std::holds_alternative<event::GhzPrepared>(e)) fail(i, "expected GhzPrepared");
        break;
      case 1:
        if (!std::holds_alternative<event::SignalPrepared>(e)) fail(i, "expected SignalPrepared");
        break;
      case 2:
        if (const auto* b = std::get_if<event::BellMeasured>(&e)) {
          w.bell = b->outcome;
        } else {
          fail(i, "expected BellMeasured");
        }
        break;
      case 3: {
        const auto* m = std::get_if<ClassicalMessage>(&e);
        if (!m || m->sender != Role::Alice ||
            m->recipients != std::vector<Role>{Role::Bob, Role::Charlie} ||
            m->payload != Payload{*w.bell}) {
          fail(i, "expected Alice's broadcast of the Bell outcome to Bob and Charlie");
        }
        break;
      }
      case 4:
      case 5: {
        const auto* c = std::get_if<event::CorrectionApplied>(&e);
        const auto& entry = bell_correction(*w.bell);
        if (c && c->role == Role::Bob && !w.bob_bell && c->qubit == Qubit::B &&
            c->unitary == entry.bob.name) {
          w.bob_bell = true;
        } else if (c && c->role == Role::Charlie && !w.charlie_bell && c->qubit == Qubit::C &&
                   c->unitary == entry.charlie.name) {
          w.charlie_bell = true;
        } else {
          fail(i, "expected the Bell correction of Bob or Charlie");
        }
        break;
      }
      case 6:
        if (const auto* c = std::get_if<event::CharlieMeasured>(&e)) {
          w.charlie = c->outcome;
        } else {
          fail(i, "expected CharlieMeasured after both Bell corrections");
        }
        break;
      case 7: {
        const auto* m = std::get_if<ClassicalMessage>(&e);
        if (!m || m->sender != Role::Charlie || m->recipients != std::vector<Role>{Role::Bob} ||
            m->payload != Payload{*w.charlie}) {
          fail(i, "expected Charlie's message to Bob");
        }
        break;
      }
      case 8: {
        const auto* c = std::get_if<event::CorrectionApplied>(&e);
        if (!c || c->role != Role::Bob || c->qubit != Qubit::B ||
            c->unitary != charlie_correction(*w.charlie).name) {
          fail(i, "expected Bob's final correction");
        }
        break;
      }
      case 9:
        if (!std::holds_alternative<event::BobCorrected>(e)) fail(i, "expected BobCorrected");
        break;
      case 10:
        if (!std::holds_alternative<event::Finished>(e)) fail(i, "expected Finished");
        break;
      default:
        fail(i, "event after Finished");
    }
    if (!w.error) ++w.step;
  }
  return w;
}

}  // namespace

std::optional<std::string> check_phase_order(const ProtocolTrace& trace) {
  return walk(trace).error;
}

Phase reached_phase(const ProtocolTrace& trace) {
  const int step = walk(trace).step;
  if (step >= 11) return Phase::Done;
  if (step >= 8) return Phase::CharlieMeasured;
  if (step >= 6) return Phase::Corrected;
  if (step >= 4) return Phase::BellMeasured;
  return Phase::Init;
}

}  // namespace ghztp::protocol
