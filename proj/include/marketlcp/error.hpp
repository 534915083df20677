#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace marketlcp {

enum class ErrorCode {
  // lcp-core
  DimensionTooLarge,
  SingularEncountered,
  EtaExceedsOne,
  // market-model
  UnconnectedNetwork,
  DuplicateReference,
  NonRationalBids,
  Infeasible,
  SolverFailure,
  // perturbation
  NotWindUnit,
  SpecTargetsFixedLoad,
  SpecTargetsConventionalUnit,
  // game-verify
  UnboundedBestResponse,
  IncompatibleGames,
  AssertionFailed,
  // case-io
  SchemaError,
  ValidationError,
  VersionError,
};

std::string_view to_string(ErrorCode code);

// Exit-code family used by the CLI: 1 validation, 2 solver, 3 assertion.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace marketlcp
