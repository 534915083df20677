#include "marketlcp/error.hpp"

namespace marketlcp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::SingularEncountered: return "SingularEncountered";
    case ErrorCode::EtaExceedsOne: return "EtaExceedsOne";
    case ErrorCode::UnconnectedNetwork: return "UnconnectedNetwork";
    case ErrorCode::DuplicateReference: return "DuplicateReference";
    case ErrorCode::NonRationalBids: return "NonRationalBids";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NotWindUnit: return "NotWindUnit";
    case ErrorCode::SpecTargetsFixedLoad: return "SpecTargetsFixedLoad";
    case ErrorCode::SpecTargetsConventionalUnit: return "SpecTargetsConventionalUnit";
    case ErrorCode::UnboundedBestResponse: return "UnboundedBestResponse";
    case ErrorCode::IncompatibleGames: return "IncompatibleGames";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::VersionError: return "VersionError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularEncountered:
    case ErrorCode::EtaExceedsOne:
    case ErrorCode::Infeasible:
    case ErrorCode::SolverFailure:
    case ErrorCode::UnboundedBestResponse:
      return 2;
    case ErrorCode::AssertionFailed:
      return 3;
    default:
      return 1;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace marketlcp
