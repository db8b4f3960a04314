#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fcs {

enum class ErrorCode {
  ConfigError,
  NonHermitianInput,
  DegenerateBohrCollision,
  NonPositiveTemperature,
  DensityEvaluationFailure,
  QuadratureNotConverged,
  KappaOutsideDomain,
  EigenvalueCollision,
  NonRealLeader,
  DerivativeMismatch,
  NonConvexObjective,
  EmptyRange,
  DimensionCap,
  OverflowGuard,
  NoExponentialDecay,
  RecurrenceHorizonExceeded,
  DeformationTooWeak,
  PopulationReductionInvalid,
  EffectiveSampleCollapse,
};

std::string_view to_string(ErrorCode code);

// Config errors map to exit code 2, everything else to 3.
bool is_config_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace fcs
