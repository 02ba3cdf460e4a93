#include "evolve/lexer.hpp"

#include <algorithm>
#include <array>

namespace evolve {
namespace {

void blank(std::string& out, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (out[i] != '\n' && out[i] != '\r') out[i] = ' ';
  }
}

bool ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

bool ident_part(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

constexpr std::array<std::string_view, 10> kTwoCharOps = {"<=", ">=", "==", "!=", "->",
                                                          "::", "&&", "||", "++", "--"};

}  // namespace

MaskedText lex_strip(std::string_view text) {
  MaskedText result{std::string(text), {}};
  std::string& out = result.text;
  const std::size_t n = text.size();
  std::size_t i = 0;

  // Scans a quoted literal starting after the opening quote; returns the
  // offset of the closing quote or npos when the line ends first.
  auto scan_quoted = [&](std::size_t from, char quote) -> std::size_t {
    std::size_t j = from;
    while (j < n && text[j] != '\n') {
      if (text[j] == '\\' && j + 1 < n && text[j + 1] != '\n') {
        j += 2;
        continue;
      }
      if (text[j] == quote) return j;
      ++j;
    }
    return std::string_view::npos;
  };

  while (i < n) {
    const char c = text[i];
    const char next = i + 1 < n ? text[i + 1] : '\0';
    if (c == '/' && next == '/') {
      auto end = text.find('\n', i + 2);
      if (end == std::string_view::npos) end = n;
      blank(out, i + 2, end);
      i = end;
    } else if (c == '/' && next == '*') {
      auto close = text.find("*/", i + 2);
      if (close == std::string_view::npos) {
        result.warnings.push_back({LexWarning::Kind::UnterminatedBlockComment, i});
        blank(out, i + 2, n);
        i = n;
      } else {
        blank(out, i + 2, close);
        i = close + 2;
      }
    } else if (c == '"' && text.substr(i, 3) == "\"\"\"") {
      std::size_t j = i + 3;
      std::size_t close = std::string_view::npos;
      while (j < n) {
        if (text[j] == '\\' && j + 1 < n) {
          j += 2;
          continue;
        }
        if (text.substr(j, 3) == "\"\"\"") {
          close = j;
          break;
        }
        ++j;
      }
      if (close == std::string_view::npos) {
        result.warnings.push_back({LexWarning::Kind::UnterminatedTextBlock, i});
        blank(out, i + 3, n);
        i = n;
      } else {
        blank(out, i + 3, close);
        i = close + 3;
      }
    } else if (c == '"' || c == '\'') {
      auto close = scan_quoted(i + 1, c);
      if (close == std::string_view::npos) {
        result.warnings.push_back(
            {c == '"' ? LexWarning::Kind::UnterminatedString : LexWarning::Kind::UnterminatedChar, i});
        auto end = text.find('\n', i + 1);
        if (end == std::string_view::npos) end = n;
        blank(out, i + 1, end);
        i = end;
      } else {
        blank(out, i + 1, close);
        i = close + 1;
      }
    } else {
      ++i;
    }
  }
  return result;
}

std::vector<Token> tokenize(std::string_view masked) {
  std::vector<Token> tokens;
  const std::size_t n = masked.size();
  std::size_t i = 0;
  while (i < n) {
    const auto c = static_cast<unsigned char>(masked[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    // Comment delimiters survive masking; they are not tokens.
    if (c == '/' && i + 1 < n && masked[i + 1] == '/') {
      i = masked.find('\n', i);
      if (i == std::string_view::npos) i = n;
      continue;
    }
    if (c == '/' && i + 1 < n && masked[i + 1] == '*') {
      const auto close = masked.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      continue;
    }
    const std::size_t start = i;
    TokenKind kind = TokenKind::Punct;
    if (ident_start(c)) {
      kind = TokenKind::Identifier;
      while (i < n && ident_part(static_cast<unsigned char>(masked[i]))) ++i;
    } else if (c >= '0' && c <= '9') {
      kind = TokenKind::Number;
      while (i < n && (ident_part(static_cast<unsigned char>(masked[i])) || masked[i] == '.')) ++i;
    } else {
      const auto two = masked.substr(i, 2);
      const bool is_two = std::find(kTwoCharOps.begin(), kTwoCharOps.end(), two) != kTwoCharOps.end();
      i += is_two ? 2 : 1;
    }
    tokens.push_back({kind, static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(i - start)});
  }
  return tokens;
}

SourceUnit::SourceUnit(std::string path, std::string text) : path_(std::move(path)), text_(std::move(text)) {
  auto masked = lex_strip(text_);
  masked_ = std::move(masked.text);
  warnings_ = std::move(masked.warnings);
  tokens_ = tokenize(masked_);
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '\n' && i + 1 < text_.size()) line_starts_.push_back(i + 1);
  }
}

int SourceUnit::line_count() const noexcept {
  return text_.empty() ? 0 : static_cast<int>(line_starts_.size());
}

Position SourceUnit::position(std::size_t offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  const auto line = static_cast<int>(it - line_starts_.begin());
  return {line, static_cast<int>(offset - line_starts_[line - 1]) + 1};
}

}  // namespace evolve
