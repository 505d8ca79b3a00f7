#include "dequant/error.hpp"

namespace dequant {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDuplicatePair: return "DUPLICATE_PAIR";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kValidationError: return "VALIDATION_ERROR";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kCycle: return "CYCLE";
    case ErrorCode::kMaxIterations: return "MAX_ITERATIONS";
    case ErrorCode::kDimensionTooLarge: return "DIMENSION_TOO_LARGE";
    case ErrorCode::kNotTotalRanking: return "NOT_TOTAL_RANKING";
    case ErrorCode::kGroupsInconsistent: return "GROUPS_INCONSISTENT";
    case ErrorCode::kUnequalReviewCounts: return "UNEQUAL_REVIEW_COUNTS";
    case ErrorCode::kDegenerateValidation: return "DEGENERATE_VALIDATION";
    case ErrorCode::kRetryExhausted: return "RETRY_EXHAUSTED";
    case ErrorCode::kAllTied: return "ALL_TIED";
    case ErrorCode::kEmpty: return "EMPTY";
    case ErrorCode::kInsufficientReviews: return "INSUFFICIENT_REVIEWS";
  }
  return "UNKNOWN";
}

}  // namespace dequant
