#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolve/outcome.hpp"

namespace evolve {

enum class PromptKind {
  UpdateFull,
  UpdatePromptA,  // ablation: no API information at all
  UpdatePromptB,  // ablation: deprecated API name only
  GenerateTest,
  RefineOldFailure,
  RefineNewFailure,
};

std::string_view to_string(PromptKind kind) noexcept;
std::optional<PromptKind> parse_prompt_kind(std::string_view text) noexcept;
bool is_update_kind(PromptKind kind) noexcept;
bool is_refinement_kind(PromptKind kind) noexcept;

/// Values substituted into the templates. Signatures are in display form
/// (`Class.member(params)`). `supplemental_context` is operator-provided
/// source appended to refinement prompts only.
struct PromptContext {
  std::string deprecated_display;
  std::optional<int> deprecation_level;
  std::vector<std::string> replacements_display;
  std::string code_snippet;
  std::optional<std::string> function_name;
  std::optional<std::string> test_name;
  std::optional<std::string> error_message;
  std::optional<std::string> test_code_snippet;
  std::optional<int> usage_line_hint;
  std::optional<std::string> supplemental_context;
};

/// Long runner output is cut to head + marker + tail.
struct TruncationPolicy {
  std::size_t budget = 4000;
  std::size_t head = 3000;
  std::size_t tail = 1000;
};

struct RenderedPrompt {
  PromptKind kind;
  std::string text;
  std::string fingerprint;  // 16 hex digits over kind and every context field
};

/// Replacement clause: items joined by " and ".
std::string join_replacements(const std::vector<std::string>& replacements);

std::string truncate_message(std::string_view message, const TruncationPolicy& policy = {});

/// Pure: identical inputs give byte-identical output. Throws
/// Error{MissingField} naming the placeholder when a required value is
/// absent or empty.
RenderedPrompt render(PromptKind kind, const PromptContext& ctx, const TruncationPolicy& policy = {});

/// Old-level failure takes precedence. Throws Error{NoFailure} when both
/// outcomes passed.
PromptKind select_refinement_kind(const TestRunOutcome& old_result, const TestRunOutcome& new_result);

}  // namespace evolve
