#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evolve {

enum class ErrorCode {
  MalformedSignature,
  SchemaError,
  DuplicateRecord,
  AmbiguousSignature,
  MissingField,
  NoFailure,
  TransportError,
  AuthError,
  ReplayExhausted,
  ReplayDivergence,
  NoCodeFound,
  LevelUnderflow,
  InvalidLevels,
  FileMissing,
  WriteFailure,
  NoTestMethods,
  UnparsableTestClass,
  RunnerProtocolError,
  NonTerminalRecord,
  InvalidRecord,
  ProjectBusy,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the pipeline reports carries one of the codes above so
/// callers (the session state machine, the CLI exit-code mapping) can branch
/// on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed line in a line-delimited document. Line numbers are 1-based.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line_no, const std::string& message);

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace evolve
