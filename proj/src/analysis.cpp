#include "evolve/analysis.hpp"

#include <algorithm>
#include <array>

namespace evolve {
namespace {

bool is_punct(const SourceUnit& u, const Token& t, std::string_view p) {
  return t.kind == TokenKind::Punct && u.token_text(t) == p;
}

bool is_ident(const SourceUnit& u, const Token& t, std::string_view name) {
  return t.kind == TokenKind::Identifier && u.token_text(t) == name;
}

template <std::size_t N>
bool one_of(std::string_view s, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

// Before `name(...) {` these mean an expression or a type header, not a method.
constexpr std::array<std::string_view, 17> kExpressionKeywords = {
    "new",   "return", "throw",  "else", "case",  "yield", "assert", "await", "in",
    "is",    "do",     "class",  "interface", "enum", "record", "object", "package"};

// Words that look like `name(...) {` but head a control block.
constexpr std::array<std::string_view, 12> kBlockKeywords = {
    "if", "for", "while", "switch", "catch", "synchronized", "when", "try", "return", "new", "super", "this"};

// Tokens a header may carry between `)` and `{`: throws clauses, Kotlin
// return types, generic arguments.
bool header_tail_token(const SourceUnit& u, const Token& t) {
  if (t.kind == TokenKind::Identifier) return true;
  auto s = u.token_text(t);
  return s == "." || s == "<" || s == ">" || s == "," || s == "?" || s == ":" || s == "[" || s == "]";
}

// If the `{` at token index `brace` opens a method body, returns the index of
// the method-name token.
std::optional<std::size_t> method_header(const SourceUnit& u, std::size_t brace) {
  const auto& toks = u.tokens();
  if (brace == 0) return std::nullopt;
  std::size_t j = brace - 1;
  while (j > 0 && header_tail_token(u, toks[j])) --j;
  if (!is_punct(u, toks[j], ")")) return std::nullopt;

  int depth = 0;
  std::size_t k = j;
  while (true) {
    if (is_punct(u, toks[k], ")")) ++depth;
    if (is_punct(u, toks[k], "(")) --depth;
    if (depth == 0) break;
    if (k == 0) return std::nullopt;
    --k;
  }
  if (k == 0) return std::nullopt;
  const std::size_t name = k - 1;
  if (toks[name].kind != TokenKind::Identifier) return std::nullopt;
  if (one_of(u.token_text(toks[name]), kBlockKeywords)) return std::nullopt;
  if (name == 0) return name;

  const Token& prev = toks[name - 1];
  const auto prev_text = u.token_text(prev);
  if (prev.kind == TokenKind::Identifier) {
    if (one_of(prev_text, kExpressionKeywords)) return std::nullopt;
    return name;
  }
  if (prev_text == ">" || prev_text == "]" || prev_text == "{" || prev_text == "}" || prev_text == ";") {
    return name;
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 11> kCallPrefixKeywords = {
    "new", "return", "throw", "else", "case", "yield", "assert", "await", "in", "is", "do"};

bool is_declaration_context(const SourceUnit& u, std::size_t name_index) {
  if (name_index == 0) return false;
  const Token& prev = u.tokens()[name_index - 1];
  const auto text = u.token_text(prev);
  if (prev.kind == TokenKind::Identifier) return !one_of(text, kCallPrefixKeywords);
  return text == ">" || text == "]" || text == "@";
}

}  // namespace

std::vector<FunctionScope> method_scopes(const SourceUnit& unit) {
  struct Open {
    std::optional<std::size_t> name_token;
  };
  const auto& toks = unit.tokens();
  std::vector<Open> stack;
  std::vector<FunctionScope> scopes;
  auto close = [&](const Open& open, int end_line) {
    if (!open.name_token) return;
    const Token& name = toks[*open.name_token];
    scopes.push_back({std::string(unit.token_text(name)), {unit.position(name.offset).line, end_line}});
  };

  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (is_punct(unit, toks[i], "{")) {
      stack.push_back({method_header(unit, i)});
    } else if (is_punct(unit, toks[i], "}") && !stack.empty()) {
      close(stack.back(), unit.position(toks[i].offset).line);
      stack.pop_back();
    }
  }
  while (!stack.empty()) {
    close(stack.back(), unit.line_count());
    stack.pop_back();
  }
  std::sort(scopes.begin(), scopes.end(), [](const FunctionScope& a, const FunctionScope& b) {
    return a.span.start_line != b.span.start_line ? a.span.start_line < b.span.start_line
                                                  : a.span.end_line > b.span.end_line;
  });
  return scopes;
}

namespace {

std::optional<FunctionScope> innermost(const std::vector<FunctionScope>& scopes, int line) {
  std::optional<FunctionScope> best;
  for (const auto& s : scopes) {
    if (!s.span.contains(line)) continue;
    if (!best || s.span.start_line > best->span.start_line ||
        (s.span.start_line == best->span.start_line && s.span.end_line < best->span.end_line)) {
      best = s;
    }
  }
  return best;
}

}  // namespace

std::optional<FunctionScope> enclosing_function(const SourceUnit& unit, int line) {
  return innermost(method_scopes(unit), line);
}

std::vector<UsageSite> find_usages(const SourceUnit& unit, const DeprecationRecord& record) {
  std::vector<UsageSite> sites;
  const auto& toks = unit.tokens();
  const auto& member = record.deprecated.member_name;
  std::optional<std::vector<FunctionScope>> scopes;
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    if (!is_punct(unit, toks[i], ".") || !is_ident(unit, toks[i + 1], member) ||
        !is_punct(unit, toks[i + 2], "(")) {
      continue;
    }
    if (!scopes) scopes = method_scopes(unit);
    const auto pos = unit.position(toks[i + 1].offset);
    UsageSite site{unit.path(), pos.line, pos.column, member, std::nullopt, std::nullopt};
    if (auto fn = innermost(*scopes, pos.line)) {
      site.enclosing_function = fn->name;
      site.enclosing_span = fn->span;
    }
    sites.push_back(std::move(site));
  }
  return sites;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Valid: return "Valid";
    case Verdict::MissingReplacement: return "MissingReplacement";
    case Verdict::MissingGuard: return "MissingGuard";
    case Verdict::ReplacementOnly: return "ReplacementOnly";
  }
  return "MissingReplacement";
}

std::optional<Verdict> parse_verdict(std::string_view text) noexcept {
  for (auto v : {Verdict::Valid, Verdict::MissingReplacement, Verdict::MissingGuard, Verdict::ReplacementOnly}) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

Verdict classify_verdict(bool replacement_present, bool guard_present, bool deprecated_retained) noexcept {
  if (!replacement_present) return Verdict::MissingReplacement;
  if (!deprecated_retained) return Verdict::ReplacementOnly;
  if (!guard_present) return Verdict::MissingGuard;
  return Verdict::Valid;
}

bool has_call(const SourceUnit& unit, std::string_view name) {
  const auto& toks = unit.tokens();
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (is_ident(unit, toks[i], name) && is_punct(unit, toks[i + 1], "(") &&
        !is_declaration_context(unit, i)) {
      return true;
    }
  }
  return false;
}

bool has_sdk_guard(const SourceUnit& unit) {
  static constexpr std::array<std::string_view, 6> kComparisons = {"<", "<=", ">", ">=", "==", "!="};
  const auto& toks = unit.tokens();
  for (std::size_t i = 0; i + 4 < toks.size(); ++i) {
    if (!is_ident(unit, toks[i], "Build") || !is_punct(unit, toks[i + 1], ".") ||
        !is_ident(unit, toks[i + 2], "VERSION") || !is_punct(unit, toks[i + 3], ".") ||
        !is_ident(unit, toks[i + 4], "SDK_INT")) {
      continue;
    }
    for (std::size_t j = i + 5; j < toks.size(); ++j) {
      const auto text = unit.token_text(toks[j]);
      if (toks[j].kind == TokenKind::Punct && (text == ";" || text == "{" || text == "}")) break;
      if (toks[j].kind == TokenKind::Punct && one_of(text, kComparisons)) return true;
    }
  }
  return false;
}

UpdateValidation validate_update(std::string_view updated_text, const DeprecationRecord& record) {
  const SourceUnit unit("<updated>", std::string(updated_text));
  UpdateValidation v;
  v.replacement_present = !record.replacements.empty() &&
                          std::all_of(record.replacements.begin(), record.replacements.end(),
                                      [&](const ApiSignature& r) { return has_call(unit, r.member_name); });
  v.deprecated_retained = has_call(unit, record.deprecated.member_name);
  v.guard_present = has_sdk_guard(unit);
  v.verdict = classify_verdict(v.replacement_present, v.guard_present, v.deprecated_retained);
  return v;
}

}  // namespace evolve
