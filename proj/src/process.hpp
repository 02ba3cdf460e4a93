#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace evolve::detail {

struct ProcessResult {
  int exit_code = -1;  // valid when exited_normally
  bool exited_normally = false;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string spawn_error;
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};
};

/// Runs argv[0] (PATH lookup) with stdin closed, capturing stdout and
/// stderr. On timeout the whole process group is killed.
ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::milliseconds timeout);

/// Splits a command line on whitespace, honoring single and double quotes
/// and backslash escapes. No other shell syntax is interpreted.
std::vector<std::string> split_command_line(const std::string& command);

}  // namespace evolve::detail
