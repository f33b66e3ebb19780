#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qio {

/// Failure categories raised by the toolkit. Each maps to one named error of
/// the public contract; `invalid_argument` covers precondition violations.
enum class Errc {
  invalid_argument,
  parse_error,
  non_unique_stationary_state,
  singular_state,
  not_ergodic,
  not_zero_mean,
  step_too_large,
  zero_jump_rate,
  all_records_impossible,
  degenerate_posterior,
  zero_variance,
  no_skew_solution,
  singular_z,
  singular_resolvent,
  not_hurwitz,
  riccati_failure,
  insufficient_data,
  not_exciting,
  log_branch,
  optimization_failed,
  degenerate_output,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string stage = {});

  Errc code() const noexcept { return code_; }
  /// Pipeline stage that raised the error, empty outside the sysid pipeline.
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const;

 private:
  Errc code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(Errc::invalid_argument, message);
}

}  // namespace qio
