#pragma once

#include <stdexcept>
#include <string>

namespace devharness {

// Domain error codes. CLI maps any DomainError to exit code 1,
// usage errors to exit code 2.
enum class errc {
  no_requirements_section,
  empty_document,
  provider_error,
  budget_exceeded,
  malformed_response,
  script_exhausted,
  unknown_tool,
  submit_denied,
  sandbox_lost,
  build_failed,
  image_unavailable,
  mask_unenforceable,
  gateway_error,
  phase_aborted,
  missing_artifact,
  malformed_judge_output,
  malformed_draft,
  insufficient_candidates,
  migration_aborted,
  harness_crash,
  no_tests,
  zero_base,
  uneven_votes,
  wrong_arity,
  zero_variance,
  length_mismatch,
  malformed_label,
  run_not_found,
  corrupt_run,
  unevaluated_run,
  invalid_argument,
  io_error,
};

const char* errc_name(errc code);

class DomainError : public std::runtime_error {
 public:
  DomainError(errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw DomainError(code, message);
}

}  // namespace devharness
