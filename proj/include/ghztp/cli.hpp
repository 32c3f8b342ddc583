#pragma once

#include <ostream>

namespace ghztp::cli {

// Exit codes. Nothing else is ever returned.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kImpossibleOutcome = 3;
inline constexpr int kConnection = 4;
inline constexpr int kStalled = 5;

// Entry point of the `ghztp` tool; reports go to `out`, diagnostics to `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ghztp::cli
