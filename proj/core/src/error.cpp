#include "qio/error.hpp"

namespace qio {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::parse_error: return "ParseError";
    case Errc::non_unique_stationary_state: return "NonUniqueStationaryState";
    case Errc::singular_state: return "SingularState";
    case Errc::not_ergodic: return "NotErgodic";
    case Errc::not_zero_mean: return "NotZeroMean";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::zero_jump_rate: return "ZeroJumpRate";
    case Errc::all_records_impossible: return "AllRecordsImpossible";
    case Errc::degenerate_posterior: return "DegeneratePosterior";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::no_skew_solution: return "NoSkewSolution";
    case Errc::singular_z: return "SingularZ";
    case Errc::singular_resolvent: return "SingularResolvent";
    case Errc::not_hurwitz: return "NotHurwitz";
    case Errc::riccati_failure: return "RiccatiFailure";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::not_exciting: return "NotExciting";
    case Errc::log_branch: return "LogBranch";
    case Errc::optimization_failed: return "OptimizationFailed";
    case Errc::degenerate_output: return "DegenerateOutput";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& message, const std::string& stage) {
  std::string out(to_string(code));
  if (!stage.empty()) out += " [" + stage + "]";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace qio
