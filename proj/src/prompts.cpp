#include "evolve/prompts.hpp"

#include <array>
#include <cstdint>
#include <cstdio>

#include "evolve/error.hpp"

namespace evolve {
namespace {

constexpr std::string_view kCompatibilitySentence =
    "The updated code should be designed to maintain compatibility with both old and new Android versions.";
constexpr std::string_view kRequestSentence = "Please provide the updated code segment.";

[[noreturn]] void missing(PromptKind kind, std::string_view field) {
  throw Error(ErrorCode::MissingField, std::string(to_string(kind)) + " requires [" + std::string(field) + "]");
}

const std::string& require(PromptKind kind, std::string_view field, const std::string& value) {
  if (value.empty()) missing(kind, field);
  return value;
}

const std::string& require(PromptKind kind, std::string_view field, const std::optional<std::string>& value) {
  if (!value || value->empty()) missing(kind, field);
  return *value;
}

std::string require_replacements(PromptKind kind, const PromptContext& ctx) {
  if (ctx.replacements_display.empty()) missing(kind, "Replacement API");
  for (const auto& r : ctx.replacements_display) {
    if (r.empty()) missing(kind, "Replacement API");
  }
  return join_replacements(ctx.replacements_display);
}

std::string line_hint(const PromptContext& ctx) {
  if (!ctx.usage_line_hint) return {};
  return " The usage to update is on line " + std::to_string(*ctx.usage_line_hint) + ".";
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fingerprint(PromptKind kind, const PromptContext& ctx) {
  std::string buf(to_string(kind));
  auto field = [&](const std::optional<std::string>& v) {
    buf += v ? "\x1e" + *v : std::string("\x1d");
    buf += '\x1f';
  };
  auto number = [&](const std::optional<int>& v) { field(v ? std::optional(std::to_string(*v)) : std::nullopt); };
  field(ctx.deprecated_display);
  number(ctx.deprecation_level);
  for (const auto& r : ctx.replacements_display) field(r);
  buf += '\x1c';
  field(ctx.code_snippet);
  field(ctx.function_name);
  field(ctx.test_name);
  field(ctx.error_message);
  field(ctx.test_code_snippet);
  number(ctx.usage_line_hint);
  field(ctx.supplemental_context);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(buf)));
  return hex;
}

}  // namespace

std::string_view to_string(PromptKind kind) noexcept {
  switch (kind) {
    case PromptKind::UpdateFull: return "UpdateFull";
    case PromptKind::UpdatePromptA: return "UpdatePromptA";
    case PromptKind::UpdatePromptB: return "UpdatePromptB";
    case PromptKind::GenerateTest: return "GenerateTest";
    case PromptKind::RefineOldFailure: return "RefineOldFailure";
    case PromptKind::RefineNewFailure: return "RefineNewFailure";
  }
  return "UpdateFull";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view text) noexcept {
  for (auto k : {PromptKind::UpdateFull, PromptKind::UpdatePromptA, PromptKind::UpdatePromptB,
                 PromptKind::GenerateTest, PromptKind::RefineOldFailure, PromptKind::RefineNewFailure}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

bool is_update_kind(PromptKind kind) noexcept {
  return kind == PromptKind::UpdateFull || kind == PromptKind::UpdatePromptA || kind == PromptKind::UpdatePromptB;
}

bool is_refinement_kind(PromptKind kind) noexcept {
  return kind == PromptKind::RefineOldFailure || kind == PromptKind::RefineNewFailure;
}

std::string join_replacements(const std::vector<std::string>& replacements) {
  std::string out;
  for (std::size_t i = 0; i < replacements.size(); ++i) {
    if (i > 0) out += " and ";
    out += replacements[i];
  }
  return out;
}

std::string truncate_message(std::string_view message, const TruncationPolicy& policy) {
  if (message.size() <= policy.budget || policy.head + policy.tail >= message.size()) {
    return std::string(message);
  }
  const auto omitted = message.size() - policy.head - policy.tail;
  std::string out(message.substr(0, policy.head));
  out += "\n[... " + std::to_string(omitted) + " characters omitted ...]\n";
  out += message.substr(message.size() - policy.tail);
  return out;
}

RenderedPrompt render(PromptKind kind, const PromptContext& ctx, const TruncationPolicy& policy) {
  std::string text;
  switch (kind) {
    case PromptKind::UpdateFull: {
      const auto& deprecated = require(kind, "Deprecated API", ctx.deprecated_display);
      if (!ctx.deprecation_level) missing(kind, "API level");
      const auto replacements = require_replacements(kind, ctx);
      const auto& code = require(kind, "Code snippet", ctx.code_snippet);
      text = "Update the usage of Deprecated API " + deprecated +
             " in the following code. It is deprecated in API level " + std::to_string(*ctx.deprecation_level) +
             " and replaced with " + replacements + ". " + std::string(kCompatibilitySentence) + " " +
             std::string(kRequestSentence) + line_hint(ctx) + "\n\n" + code;
      break;
    }
    case PromptKind::UpdatePromptA: {
      const auto& code = require(kind, "Code snippet", ctx.code_snippet);
      text = "Update any deprecated Android API usages in the following code. " +
             std::string(kCompatibilitySentence) + " " + std::string(kRequestSentence) + line_hint(ctx) + "\n\n" +
             code;
      break;
    }
    case PromptKind::UpdatePromptB: {
      const auto& deprecated = require(kind, "Deprecated API", ctx.deprecated_display);
      const auto& code = require(kind, "Code snippet", ctx.code_snippet);
      text = "Update the usage of Deprecated API " + deprecated + " in the following code. " +
             std::string(kCompatibilitySentence) + " " + std::string(kRequestSentence) + line_hint(ctx) + "\n\n" +
             code;
      break;
    }
    case PromptKind::GenerateTest: {
      const auto& function = require(kind, "Function name", ctx.function_name);
      const auto& deprecated = require(kind, "Deprecated API", ctx.deprecated_display);
      const auto& code = require(kind, "Code snippet", ctx.code_snippet);
      text = "Generate a Robolectric test for the function " + function +
             " to test its current functionality where the deprecated API " + deprecated +
             " is used. This will help us verify any changes made to its behavior after the update.\n\n" + code;
      break;
    }
    case PromptKind::RefineOldFailure: {
      const auto& test = require(kind, "Test Name", ctx.test_name);
      const auto& error = require(kind, "Error Message", ctx.error_message);
      const auto& test_code = require(kind, "Test code snippet", ctx.test_code_snippet);
      text = "The Robolectric test named " + test + " failed on older Android versions with the following error: " +
             truncate_message(error, policy) + ". Please refine the test to correct this error.\n\n" + test_code;
      break;
    }
    case PromptKind::RefineNewFailure: {
      const auto& test = require(kind, "Test Name", ctx.test_name);
      const auto& error = require(kind, "Error Message", ctx.error_message);
      const auto& test_code = require(kind, "Test code snippet", ctx.test_code_snippet);
      const auto replacements = require_replacements(kind, ctx);
      const auto& deprecated = require(kind, "Deprecated API", ctx.deprecated_display);
      text = "The Robolectric test named " + test + " passed on older Android versions but failed on newer ones " +
             "with the error: " + truncate_message(error, policy) + ". If the new API " + replacements +
             " behaves differently than the deprecated one " + deprecated +
             " and cannot be tested with the initially generated test, generate a new Robolectric test to capture "
             "this behavior. Otherwise, make changes in the code you provided to resolve the issue.\n\n" +
             test_code;
      break;
    }
  }
  if (is_refinement_kind(kind) && ctx.supplemental_context && !ctx.supplemental_context->empty()) {
    text += "\n\n" + *ctx.supplemental_context;
  }
  return {kind, std::move(text), fingerprint(kind, ctx)};
}

PromptKind select_refinement_kind(const TestRunOutcome& old_result, const TestRunOutcome& new_result) {
  if (old_result.status != RunStatus::Passed) return PromptKind::RefineOldFailure;
  if (new_result.status != RunStatus::Passed) return PromptKind::RefineNewFailure;
  throw Error(ErrorCode::NoFailure, "both levels passed");
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Passed: return "passed";
    case RunStatus::Failed: return "failed";
    case RunStatus::InfrastructureError: return "error";
  }
  return "error";
}

}  // namespace evolve
