#include "spsched/error.h"

namespace spsched {

const char* toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::OutOfBounds: return "coordinate out of bounds";
    case ErrorCode::NonNumeric: return "non-numeric value";
    case ErrorCode::MalformedInput: return "malformed input";
    case ErrorCode::Syntax: return "syntax error";
    case ErrorCode::UnboundTensor: return "unbound tensor";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::NotDirectlyNested: return "not directly nested";
    case ErrorCode::DiscordantTraversal: return "discordant traversal";
    case ErrorCode::TaggedVariable: return "tagged variable";
    case ErrorCode::NotPositionSpace: return "not position space";
    case ErrorCode::DenseLevel: return "dense level";
    case ErrorCode::UnionMerge: return "union merge";
    case ErrorCode::RaceDetected: return "race detected";
    case ErrorCode::DuplicateParallel: return "duplicate parallel tag";
    case ErrorCode::NonConstantExtent: return "non-constant extent";
    case ErrorCode::ExprNotFound: return "expression not found";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Unrecoverable: return "unrecoverable variable";
    case ErrorCode::ContractViolation: return "contract violation";
    case ErrorCode::ArrayBounds: return "array bounds";
  }
  return "unknown";
}

}  // namespace spsched
