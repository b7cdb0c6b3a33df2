#pragma once

#include <stdexcept>
#include <string>

namespace phasels {

enum class ErrorCode {
  kInvalidDimension,
  kInvalidSparsity,
  kLengthMismatch,
  kInvalidArgument,
  kSingularSystem,
  kDivergence,
  kParse,
  kIo,
  kTrial,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported as phasels::Error carrying a code, so
// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace phasels
