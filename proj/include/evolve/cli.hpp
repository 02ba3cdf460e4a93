#pragma once

#include <iosfwd>
#include <vector>

#include "evolve/session.hpp"

namespace evolve {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFlagged = 3;
inline constexpr int kExitFailed = 4;

/// 4 if any session failed, else 3 if any was flagged, else 0.
int exit_code_for(const std::vector<SessionStatus>& statuses);

/// Entry point for the `evolve` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evolve
