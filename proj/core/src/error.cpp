#include "fracsob/error.hpp"

namespace fracsob {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::DisconnectedDomain: return "DisconnectedDomain";
    case ErrorCode::UnreachablePoints: return "UnreachablePoints";
    case ErrorCode::PairOutsideDomain: return "PairOutsideDomain";
    case ErrorCode::EmptyGamma: return "EmptyGamma";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyClosedSet: return "EmptyClosedSet";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptyInteriorClass: return "EmptyInteriorClass";
    case ErrorCode::UncoveredExteriorCell: return "UncoveredExteriorCell";
    case ErrorCode::InconsistentInputs: return "InconsistentInputs";
    case ErrorCode::EmptyD: return "EmptyD";
    case ErrorCode::NonpositiveP: return "NonpositiveP";
    case ErrorCode::RegionTooSmall: return "RegionTooSmall";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::WingTruncationTooSmall: return "WingTruncationTooSmall";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::DegenerateFamilyMember: return "DegenerateFamilyMember";
    case ErrorCode::EllipticityViolated: return "EllipticityViolated";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::DimensionBudgetExceeded: return "DimensionBudgetExceeded";
    case ErrorCode::ZeroForcing: return "ZeroForcing";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, std::string op, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + " in " + module + "::" + op + ": " + detail),
      code_(code),
      module_(std::move(module)),
      op_(std::move(op)) {}

}  // namespace fracsob
