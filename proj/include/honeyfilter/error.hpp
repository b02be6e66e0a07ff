#pragma once

#include <stdexcept>
#include <string>

namespace honeyfilter {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kParse,
  kEmptyCorpus,
  kBudgetExhausted,
  kVocabExhausted,
  kNonFinite,
  kUnknownAccount,
  kNetwork,
  kRefusal,
  kHashMismatch,
  kRuntime,
};

const char* error_code_name(ErrorCode code);

// All library failures are reported through this exception; the C API maps
// `code()` onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace honeyfilter
