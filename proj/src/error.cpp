#include "honeyfilter/error.hpp"

namespace honeyfilter {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kBudgetExhausted: return "budget_exhausted";
    case ErrorCode::kVocabExhausted: return "vocab_exhausted";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kUnknownAccount: return "unknown_account";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kRefusal: return "refusal";
    case ErrorCode::kHashMismatch: return "hash_mismatch";
    case ErrorCode::kRuntime: return "runtime";
  }
  return "unknown";
}

}  // namespace honeyfilter
