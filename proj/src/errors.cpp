#include "gridfeas/errors.hpp"
#include "gridfeas/types.hpp"

#include <cmath>

namespace gridfeas {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::LoadSubgraphReducible: return "LoadSubgraphReducible";
    case ErrorCode::NotZMatrix: return "NotZMatrix";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonPositiveVoltage: return "NonPositiveVoltage";
    case ErrorCode::NotSingleLoad: return "NotSingleLoad";
    case ErrorCode::OracleScaleExceeded: return "OracleScaleExceeded";
    case ErrorCode::LambdaNotInLambda: return "LambdaNotInLambda";
    case ErrorCode::LambdaNotInLambda1: return "LambdaNotInLambda1";
    case ErrorCode::NotSemiStable: return "NotSemiStable";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NoCrossingFound: return "NoCrossingFound";
    case ErrorCode::NotTwoLoads: return "NotTwoLoads";
    case ErrorCode::NonPositiveNu: return "NonPositiveNu";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable: return "Stable";
    case StabilityClass::SemiStableBoundary: return "SemiStableBoundary";
    case StabilityClass::Unstable: return "Unstable";
  }
  return "Unknown";
}

DemandVector::DemandVector(Eigen::VectorXd watts) : values_(std::move(watts)) {
  if (!values_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "demand vector has non-finite entries");
  }
}

}  // namespace gridfeas
