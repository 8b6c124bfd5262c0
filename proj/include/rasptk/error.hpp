#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rasptk {

// 1-based line/column range inside a candidate source text.
struct SourceSpan {
  int line = 0;
  int column = 0;
  int end_line = 0;
  int end_column = 0;

  bool valid() const { return line > 0; }
  std::string to_string() const;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ErrorCode {
  // surface
  kSyntaxError,
  kUnsupportedConstruct,
  kEmptyProgram,
  // elaboration
  kUnknownIdentifier,
  kArityError,
  kKindError,
  kCycleError,
  // evaluation and lowering
  kDivisionByZero,
  kTypeMismatch,
  kNonNumericAverage,
  kCardinalityCap,
  kStateCorruption,
  kInputOutOfDomain,
  kUnsupportedNode,
  // datasets and oracles
  kSchemaError,
  kDuplicateName,
  kUnknownOracle,
  kExampleMismatch,
  kOracleError,
  // harness and reporting
  kEmptyResults,
  kIoError,
  kInsufficientExamples,
  kNoCodeBlock,
  kUnterminatedFence,
  kProviderError,
  kBudgetExceeded,
  kConfigError,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourceSpan> span = std::nullopt);

  ErrorCode code() const { return code_; }
  const std::optional<SourceSpan>& span() const { return span_; }
  // Message without the code prefix or span decoration.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<SourceSpan> span_;
};

}  // namespace rasptk
