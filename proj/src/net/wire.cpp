#include "ghztp/wire.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace ghztp::net {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {
    "Hello", "Grant", "OpRequest", "OpResult", "Classical", "Finish", "Error"};

}  // namespace

std::string_view to_string(Kind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

Kind parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<Kind>(i);
  }
  throw FrameError("unknown message kind '" + std::string(name) + "'");
}

std::string encode(const WireMessage& m) {
  const nlohmann::json j = {
      {"seq", m.seq}, {"session", m.session_id}, {"kind", to_string(m.kind)}, {"body", m.body}};
  // dump() escapes control characters, so the line never contains '\n'.
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

WireMessage decode(std::string_view line) {
  if (line.size() > kMaxLineBytes) throw FrameError("frame exceeds 64 KiB");
  const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw FrameError("frame is not a JSON object");
  auto field = [&](const char* key) -> const nlohmann::json& {
    const auto it = j.find(key);
    if (it == j.end()) throw FrameError(std::string("frame lacks '") + key + "'");
    return *it;
  };
  const auto& seq = field("seq");
  const auto& session = field("session");
  const auto& kind = field("kind");
  const auto& body = field("body");
  if (!seq.is_number_integer()) throw FrameError("'seq' must be an integer");
  if (seq.is_number_unsigned() &&
      seq.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw FrameError("'seq' out of range");
  }
  if (!session.is_string()) throw FrameError("'session' must be a string");
  if (!kind.is_string()) throw FrameError("'kind' must be a string");
  if (!body.is_object()) throw FrameError("'body' must be an object");
  if (j.size() != 4) throw FrameError("frame has unexpected fields");
  return WireMessage{seq.get<std::int64_t>(), session.get<std::string>(),
                     parse_kind(kind.get<std::string>()), body};
}

}  // namespace ghztp::net
