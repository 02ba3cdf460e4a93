#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evolve {

struct LexWarning {
  enum class Kind { UnterminatedString, UnterminatedChar, UnterminatedBlockComment, UnterminatedTextBlock };
  Kind kind;
  std::size_t offset;  // offset of the opening delimiter
};

struct MaskedText {
  std::string text;
  std::vector<LexWarning> warnings;
};

/// Blanks the interiors of comments and string/char literals (Java and
/// Kotlin lexical rules, including `"""` text blocks). The result has the
/// same length as the input, keeps every delimiter, and keeps `\n` and `\r`
/// in place so offsets and line numbers carry over unchanged.
MaskedText lex_strip(std::string_view text);

enum class TokenKind : std::uint8_t { Identifier, Number, Punct };

struct Token {
  TokenKind kind;
  std::uint32_t offset;
  std::uint32_t length;
};

/// Tokenizes masked text. Multi-character operators (`<=`, `>=`, `==`, `!=`,
/// `->`, `::`, `&&`, `||`, `++`, `--`) are single tokens; `>>` is not merged
/// so generic closers stay separate. Comments yield no tokens.
std::vector<Token> tokenize(std::string_view masked);

struct Position {
  int line;    // 1-based
  int column;  // 1-based, in bytes
};

/// A source file plus everything derived from it: masked text, tokens and
/// line-start offsets. Tokens refer into `masked()` by offset.
class SourceUnit {
 public:
  SourceUnit(std::string path, std::string text);

  const std::string& path() const noexcept { return path_; }
  const std::string& text() const noexcept { return text_; }
  const std::string& masked() const noexcept { return masked_; }
  const std::vector<LexWarning>& warnings() const noexcept { return warnings_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const std::vector<std::size_t>& line_index() const noexcept { return line_starts_; }

  int line_count() const noexcept;
  Position position(std::size_t offset) const;
  std::string_view token_text(const Token& t) const {
    return std::string_view(masked_).substr(t.offset, t.length);
  }

 private:
  std::string path_;
  std::string text_;
  std::string masked_;
  std::vector<LexWarning> warnings_;
  std::vector<Token> tokens_;
  std::vector<std::size_t> line_starts_;
};

}  // namespace evolve
