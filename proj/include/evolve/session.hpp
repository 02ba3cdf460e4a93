#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "evolve/analysis.hpp"
#include "evolve/catalog.hpp"
#include "evolve/gateway.hpp"
#include "evolve/harness.hpp"
#include "evolve/prompts.hpp"

namespace evolve {

enum class SessionStatus {
  Pending,
  UpdatedAwaitingTest,
  Testing,
  RefiningCode,
  RefiningTest,
  Succeeded,
  SucceededValidatorFlagged,
  FailedBoundReached,
  FailedNoCode,
  FailedInfrastructure,
};

std::string_view to_string(SessionStatus s) noexcept;
std::optional<SessionStatus> parse_session_status(std::string_view text) noexcept;
bool is_terminal(SessionStatus s) noexcept;
bool is_success(SessionStatus s) noexcept;
bool is_failure(SessionStatus s) noexcept;

struct HistoryEntry {
  int iteration = 0;
  std::string event;    // e.g. "update", "generate_test", "run", "refine_test"
  std::string outcome;  // free text, deterministic under replay

  bool operator==(const HistoryEntry&) const = default;
};

struct SessionTimings {
  std::optional<std::int64_t> update_ms;
  std::optional<std::int64_t> test_gen_ms;
  std::vector<std::int64_t> refinements_ms;
};

struct SessionOptions {
  int max_iterations = 5;
  PromptKind update_kind = PromptKind::UpdateFull;
  bool keep_changes = false;
  std::optional<std::string> supplemental_context;
  std::filesystem::path test_source_dir = "app/src/test/java";
  TruncationPolicy truncation;
};

struct SessionInputs {
  std::string session_id;  // empty: derived from the usage site
  DeprecationRecord record;
  UsageSite usage;  // unit_path is relative to project_root
  std::filesystem::path project_root;
  LevelPair levels;
  SessionOptions options;
};

struct MigrationSession {
  std::string session_id;
  DeprecationRecord record;
  UsageSite usage;
  LevelPair levels;
  int iteration = 0;
  int max_iterations = 5;
  std::string current_code;
  std::optional<std::string> current_test;  // as generated, before wrapping
  SessionStatus status = SessionStatus::Pending;
  std::optional<UpdateValidation> validation;
  std::vector<HistoryEntry> history;
  SessionTimings timings;
  int gateway_calls = 0;
  int runner_invocations = 0;
};

/// `unit_path:line:member`
std::string default_session_id(const UsageSite& usage);

enum class ReplyKind { TestReplacement, CodeReplacement };

/// Throws std::invalid_argument for a non-refinement kind.
ReplyKind classify_refinement_reply(const ExtractedCode& reply, PromptKind kind);

/// Drives one usage site to a terminal status. Never throws for gateway,
/// runner or filesystem failures; those end in FailedInfrastructure with the
/// error in history. The project tree is restored unless keep_changes is set
/// and the session succeeded.
MigrationSession run_session(const SessionInputs& inputs, Gateway& gateway, TestRunner& runner);

/// Result-file document for one session.
nlohmann::ordered_json session_result_json(const MigrationSession& session);

}  // namespace evolve
