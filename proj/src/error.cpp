#include "evolve/error.hpp"

namespace evolve {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedSignature: return "MalformedSignature";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::AmbiguousSignature: return "AmbiguousSignature";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NoFailure: return "NoFailure";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::ReplayExhausted: return "ReplayExhausted";
    case ErrorCode::ReplayDivergence: return "ReplayDivergence";
    case ErrorCode::NoCodeFound: return "NoCodeFound";
    case ErrorCode::LevelUnderflow: return "LevelUnderflow";
    case ErrorCode::InvalidLevels: return "InvalidLevels";
    case ErrorCode::FileMissing: return "FileMissing";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::NoTestMethods: return "NoTestMethods";
    case ErrorCode::UnparsableTestClass: return "UnparsableTestClass";
    case ErrorCode::RunnerProtocolError: return "RunnerProtocolError";
    case ErrorCode::NonTerminalRecord: return "NonTerminalRecord";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::ProjectBusy: return "ProjectBusy";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SchemaError::SchemaError(std::size_t line_no, const std::string& message)
    : Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + message),
      line_no_(line_no) {}

}  // namespace evolve
