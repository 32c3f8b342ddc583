#pragma once

// Line-framed messages between the coordinator and the three parties. One
// JSON object per line: {"seq":n,"session":"...","kind":"...","body":{...}}.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ghztp/errors.hpp"

namespace ghztp::net {

inline constexpr std::size_t kMaxLineBytes = 64 * 1024;

enum class Kind { Hello, Grant, OpRequest, OpResult, Classical, Finish, Error };

std::string_view to_string(Kind kind);
Kind parse_kind(std::string_view name);  // throws FrameError

struct WireMessage {
  std::int64_t seq = 0;
  std::string session_id;
  Kind kind = Kind::Hello;
  nlohmann::json body = nlohmann::json::object();

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

namespace code {
inline constexpr std::string_view kLocality = "ERR_LOCALITY";
inline constexpr std::string_view kPhase = "ERR_PHASE";
inline constexpr std::string_view kFrame = "ERR_FRAME";
inline constexpr std::string_view kRoleTaken = "ERR_ROLE_TAKEN";
// The session cannot progress: a party it waits on is gone or the
// deadline passed.
inline constexpr std::string_view kStalled = "ERR_STALLED";
}  // namespace code

class FrameError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Without the trailing newline.
std::string encode(const WireMessage& m);
// Throws FrameError on anything that is not a well-formed frame: bad JSON,
// missing or mistyped fields, unknown kind, non-object body, oversize line.
WireMessage decode(std::string_view line);

}  // namespace ghztp::net
