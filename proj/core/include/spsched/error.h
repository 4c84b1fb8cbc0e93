#ifndef SPSCHED_ERROR_H
#define SPSCHED_ERROR_H

#include <stdexcept>
#include <string>

namespace spsched {

/// Classifies every failure the library reports. Tests and the CLI switch on
/// the code; the message carries the human-readable detail.
enum class ErrorCode {
  MalformedHeader,
  OutOfBounds,
  NonNumeric,
  MalformedInput,
  Syntax,
  UnboundTensor,
  DimensionMismatch,
  InvalidArgument,
  NotDirectlyNested,
  DiscordantTraversal,
  TaggedVariable,
  NotPositionSpace,
  DenseLevel,
  UnionMerge,
  RaceDetected,
  DuplicateParallel,
  NonConstantExtent,
  ExprNotFound,
  Unsupported,
  Unrecoverable,
  ContractViolation,
  ArrayBounds,
};

const char* toString(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

/// Parse failures carry the 1-based line number of the offending input line
/// (or the character offset for expression text).
class ParseError : public Error {
public:
  ParseError(ErrorCode code, int line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const { return line_; }

private:
  int line_;
};

}  // namespace spsched

#endif
