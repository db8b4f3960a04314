#include "fcs/errors.hpp"

namespace fcs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::DegenerateBohrCollision: return "DegenerateBohrCollision";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::DensityEvaluationFailure: return "DensityEvaluationFailure";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::KappaOutsideDomain: return "KappaOutsideDomain";
    case ErrorCode::EigenvalueCollision: return "EigenvalueCollision";
    case ErrorCode::NonRealLeader: return "NonRealLeader";
    case ErrorCode::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorCode::NonConvexObjective: return "NonConvexObjective";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::NoExponentialDecay: return "NoExponentialDecay";
    case ErrorCode::RecurrenceHorizonExceeded: return "RecurrenceHorizonExceeded";
    case ErrorCode::DeformationTooWeak: return "DeformationTooWeak";
    case ErrorCode::PopulationReductionInvalid: return "PopulationReductionInvalid";
    case ErrorCode::EffectiveSampleCollapse: return "EffectiveSampleCollapse";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::NonHermitianInput:
    case ErrorCode::DegenerateBohrCollision:
    case ErrorCode::NonPositiveTemperature:
    case ErrorCode::DensityEvaluationFailure:
    case ErrorCode::KappaOutsideDomain:
    case ErrorCode::EmptyRange:
    case ErrorCode::DimensionCap:
      return true;
    default:
      return false;
  }
}

}  // namespace fcs
