#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "evolve/session.hpp"

namespace evolve {

/// The subset of a session result file that aggregation needs.
struct SessionResult {
  std::string session;
  std::string api;
  SessionStatus status = SessionStatus::Pending;
  int iterations = 0;
  std::optional<std::int64_t> update_ms;
  std::optional<std::int64_t> test_gen_ms;
  std::vector<std::int64_t> refinements_ms;
};

/// Throws Error{InvalidRecord} on a document that does not follow the
/// result-file schema.
SessionResult parse_session_result(const nlohmann::json& doc);
SessionResult to_result(const MigrationSession& session);

struct ApiResultRow {
  std::string api;
  int usages = 0;
  int succeeded = 0;
  int flagged = 0;
  int failed = 0;

  bool operator==(const ApiResultRow&) const = default;
};

struct IterationHistogram {
  std::map<int, int> buckets;  // every key 0..max_iterations present
  int failed = 0;
  int total = 0;

  bool operator==(const IterationHistogram&) const = default;
};

struct PhaseMean {
  double mean_ms = 0.0;
  int samples = 0;

  bool operator==(const PhaseMean&) const = default;
};

struct TimingSummary {
  PhaseMean update;
  PhaseMean test_gen;
  PhaseMean refinement;  // over every refinement round of every session

  bool operator==(const TimingSummary&) const = default;
};

struct Aggregates {
  std::vector<ApiResultRow> rows;  // sorted by api
  IterationHistogram histogram;
  TimingSummary timings;
  int max_iterations = 5;

  bool operator==(const Aggregates&) const = default;
};

/// Throws Error{NonTerminalRecord} for a non-terminal status and
/// Error{InvalidRecord} when a record's iterations fall outside
/// 0..max_iterations.
Aggregates aggregate(const std::vector<SessionResult>& results, int max_iterations = 5);

enum class ReportFormat { PlainTable, DelimitedValues, StructuredDocument };

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;

std::string render_report(const Aggregates& aggregates, ReportFormat format);

}  // namespace evolve
