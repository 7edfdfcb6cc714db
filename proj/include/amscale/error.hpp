#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amscale {

enum class ErrorCode {
  parse_error,
  empty_input,
  config_error,
  io_error,
  no_valid_respondents,
  singular_respondent,
  insufficient_rows,
  too_few_stimuli,
  not_identified,
  ambiguous_polarity,
  bootstrap_degenerate,
  degenerate_variance,
  insufficient_placements,
  empty_stimulus_column,
  zero_weight,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map failures without parsing messages.
class ScalingError : public std::runtime_error {
 public:
  ScalingError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Identification and estimation failures, as opposed to bad input.
  bool is_estimation_failure() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace amscale
