#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evolve {

enum class RunStatus { Passed, Failed, InfrastructureError };

std::string_view to_string(RunStatus s) noexcept;

/// Result of one runner invocation at one SDK level. A Failed outcome always
/// names the failing test and carries a message; a Passed outcome carries
/// neither.
struct TestRunOutcome {
  int level = 0;
  RunStatus status = RunStatus::Passed;
  std::optional<std::string> failed_test;
  std::optional<std::string> message;
  std::int64_t duration_ms = 0;

  bool operator==(const TestRunOutcome&) const = default;

  static TestRunOutcome passed(int level, std::int64_t duration_ms = 0) {
    return {level, RunStatus::Passed, std::nullopt, std::nullopt, duration_ms};
  }
  static TestRunOutcome failed(int level, std::string test, std::string message, std::int64_t duration_ms = 0) {
    return {level, RunStatus::Failed, std::move(test), std::move(message), duration_ms};
  }
  static TestRunOutcome infrastructure(int level, std::string message, std::int64_t duration_ms = 0) {
    return {level, RunStatus::InfrastructureError, std::nullopt, std::move(message), duration_ms};
  }
};

}  // namespace evolve
