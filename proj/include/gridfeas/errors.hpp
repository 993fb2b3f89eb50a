#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridfeas {

enum class ErrorCode {
  InvalidSpec,
  DisconnectedGraph,
  LoadSubgraphReducible,
  NotZMatrix,
  NotIrreducible,
  NoConvergence,
  NotSymmetric,
  NonPositiveVoltage,
  NotSingleLoad,
  OracleScaleExceeded,
  LambdaNotInLambda,
  LambdaNotInLambda1,
  NotSemiStable,
  StepSizeUnderflow,
  NoCrossingFound,
  NotTwoLoads,
  NonPositiveNu,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by build_model when the load block of the Kirchhoff matrix is not
// irreducible. The payload lists the connected components of the load
// subgraph (load indices, loads-first ordering) so the caller can split.
class LoadSubgraphReducibleError : public Error {
 public:
  LoadSubgraphReducibleError(const std::string& what,
                             std::vector<std::vector<std::size_t>> components)
      : Error(ErrorCode::LoadSubgraphReducible, what), components_(std::move(components)) {}

  const std::vector<std::vector<std::size_t>>& components() const noexcept { return components_; }

 private:
  std::vector<std::vector<std::size_t>> components_;
};

}  // namespace gridfeas
