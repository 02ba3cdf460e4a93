#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolve/catalog.hpp"
#include "evolve/lexer.hpp"

namespace evolve {

struct LineSpan {
  int start_line;
  int end_line;

  bool contains(int line) const noexcept { return start_line <= line && line <= end_line; }
  bool operator==(const LineSpan&) const = default;
};

struct FunctionScope {
  std::string name;
  LineSpan span;  // header line through closing-brace line

  bool operator==(const FunctionScope&) const = default;
};

struct UsageSite {
  std::string unit_path;
  int line = 0;
  int column = 0;  // column of the member-name token
  std::string matched_member;
  std::optional<std::string> enclosing_function;
  std::optional<LineSpan> enclosing_span;

  bool operator==(const UsageSite&) const = default;
};

/// All method bodies in the unit, found by brace-depth tracking on masked
/// text. Control-flow blocks, lambdas, anonymous class bodies, and type
/// bodies are not methods.
std::vector<FunctionScope> method_scopes(const SourceUnit& unit);

/// Innermost method whose span contains `line`.
std::optional<FunctionScope> enclosing_function(const SourceUnit& unit, int line);

/// Every `. member (` token sequence outside comments and literals, in file
/// order. Matching is by member name only; receiver types are not resolved.
std::vector<UsageSite> find_usages(const SourceUnit& unit, const DeprecationRecord& record);

enum class Verdict { Valid, MissingReplacement, MissingGuard, ReplacementOnly };

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view text) noexcept;

struct UpdateValidation {
  bool replacement_present = false;
  bool guard_present = false;
  bool deprecated_retained = false;
  Verdict verdict = Verdict::MissingReplacement;

  bool operator==(const UpdateValidation&) const = default;
};

Verdict classify_verdict(bool replacement_present, bool guard_present, bool deprecated_retained) noexcept;

/// True when `name (` occurs as a call in the unit: qualified (`x.name(`),
/// unqualified in expression position, or a constructor call. Method
/// declarations and annotations do not count.
bool has_call(const SourceUnit& unit, std::string_view name);

/// `Build.VERSION.SDK_INT` followed by a comparison operator before the end
/// of the statement. The direction of the comparison is not judged.
bool has_sdk_guard(const SourceUnit& unit);

/// Structural check of an updated file: every replacement called, an SDK
/// guard present, and the deprecated call still there for old levels. It does
/// not check that the two calls sit on opposite branches of the guard.
UpdateValidation validate_update(std::string_view updated_text, const DeprecationRecord& record);

}  // namespace evolve
