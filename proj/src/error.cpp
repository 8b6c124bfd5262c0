#include "rasptk/error.hpp"

namespace rasptk {

std::string SourceSpan::to_string() const {
  if (!valid()) return "<unknown>";
  return std::to_string(line) + ":" + std::to_string(column);
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kUnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::kEmptyProgram: return "EmptyProgram";
    case ErrorCode::kUnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::kArityError: return "ArityError";
    case ErrorCode::kKindError: return "KindError";
    case ErrorCode::kCycleError: return "CycleError";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kNonNumericAverage: return "NonNumericAverage";
    case ErrorCode::kCardinalityCap: return "CardinalityCap";
    case ErrorCode::kStateCorruption: return "StateCorruption";
    case ErrorCode::kInputOutOfDomain: return "InputOutOfDomain";
    case ErrorCode::kUnsupportedNode: return "UnsupportedNode";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownOracle: return "UnknownOracle";
    case ErrorCode::kExampleMismatch: return "ExampleMismatch";
    case ErrorCode::kOracleError: return "OracleError";
    case ErrorCode::kEmptyResults: return "EmptyResults";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInsufficientExamples: return "InsufficientExamples";
    case ErrorCode::kNoCodeBlock: return "NoCodeBlock";
    case ErrorCode::kUnterminatedFence: return "UnterminatedFence";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "UnknownError";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     const std::optional<SourceSpan>& span) {
  std::string out(error_code_name(code));
  if (span && span->valid()) out += " at " + span->to_string();
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<SourceSpan> span)
    : std::runtime_error(decorate(code, message, span)),
      code_(code),
      detail_(message),
      span_(span) {}

}  // namespace rasptk
