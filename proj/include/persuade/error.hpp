#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace persuade {

enum class ErrorCode {
  invalid_argument,
  no_preimage,
  out_of_simplex,
  ambiguous_invariant,
  not_bayes_plausible,
  invalid_weights,
  undefined_posterior,
  not_applicable,
  divergence,
  budget_exceeded,
  config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::no_preimage: return "no-preimage";
    case ErrorCode::out_of_simplex: return "out-of-simplex";
    case ErrorCode::ambiguous_invariant: return "ambiguous-invariant";
    case ErrorCode::not_bayes_plausible: return "not-bayes-plausible";
    case ErrorCode::invalid_weights: return "invalid-weights";
    case ErrorCode::undefined_posterior: return "undefined-posterior";
    case ErrorCode::not_applicable: return "not-applicable";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, std::string_view what) {
  if (!condition) fail(code, std::string(what));
}

}  // namespace persuade
