#include "amscale/error.hpp"

namespace amscale {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::no_valid_respondents: return "NoValidRespondents";
    case ErrorCode::singular_respondent: return "SingularRespondent";
    case ErrorCode::insufficient_rows: return "InsufficientRows";
    case ErrorCode::too_few_stimuli: return "TooFewStimuli";
    case ErrorCode::not_identified: return "NotIdentified";
    case ErrorCode::ambiguous_polarity: return "AmbiguousPolarity";
    case ErrorCode::bootstrap_degenerate: return "BootstrapDegenerate";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::insufficient_placements: return "InsufficientPlacements";
    case ErrorCode::empty_stimulus_column: return "EmptyStimulusColumn";
    case ErrorCode::zero_weight: return "ZeroWeight";
  }
  return "Unknown";
}

bool ScalingError::is_estimation_failure() const noexcept {
  switch (code_) {
    case ErrorCode::parse_error:
    case ErrorCode::empty_input:
    case ErrorCode::config_error:
    case ErrorCode::io_error:
      return false;
    default:
      return true;
  }
}

}  // namespace amscale
