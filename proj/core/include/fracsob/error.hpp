#pragma once

#include <stdexcept>
#include <string>

namespace fracsob {

enum class ErrorCode {
  MalformedSpec,
  InvalidGeometry,
  DisconnectedDomain,
  UnreachablePoints,
  PairOutsideDomain,
  EmptyGamma,
  EmptySet,
  EmptyClosedSet,
  WindowTooSmall,
  InvalidParameters,
  NotFound,
  EmptyInteriorClass,
  UncoveredExteriorCell,
  InconsistentInputs,
  EmptyD,
  NonpositiveP,
  RegionTooSmall,
  ZeroDenominator,
  WingTruncationTooSmall,
  SolverDiverged,
  DegenerateFamilyMember,
  EllipticityViolated,
  ResolutionTooCoarse,
  DimensionBudgetExceeded,
  ZeroForcing,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

// Every library failure carries the module and operation that raised it so
// the CLI can print a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, std::string op, const std::string& detail);

  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }
  const std::string& op() const { return op_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string op_;
};

}  // namespace fracsob
