#pragma once

#include "gridfeas/grid.hpp"
#include "gridfeas/specmat.hpp"
#include "gridfeas/types.hpp"

#include <random>

namespace gridfeas::stability {

// A point of the closure of the set of long-term voltage stable operating
// points, written as a direction lambda (unit 1-norm, h(lambda) positive
// definite) and a Perron root r >= 0.
struct StabilityParam {
  VectorXd lambda;
  double r = 0.0;
};

enum class Lambda1Membership { Interior, Boundary, Outside };

// h(lambda) = 1/2 ([lambda] Y_LL + Y_LL [lambda]).
MatrixXd h_of(const GridModel& model, const VectorXd& lambda);

// Expects ||lambda||_1 = 1 (InvalidArgument otherwise, tolerance 1e-9).
// Boundary when h(lambda) is positive semidefinite and singular within
// tol * (1 + ||h||_inf).
Lambda1Membership in_lambda1(const GridModel& model, const VectorXd& lambda, double tol = 1e-9);

// Perron data of -jacobian(V_L)^T. For a model with a reducible load block the
// matrix is block diagonal over the load components; the block with the
// smallest root wins and its vector is padded with zeros.
specmat::PerronData jacobian_perron(const GridModel& model, const VectorXd& v_load);

// Stable iff -jacobian is a nonsingular M-matrix, SemiStableBoundary iff
// singular M, Unstable otherwise. relative_tol scales as tol * (1 + ||J||_inf).
// Errors: NonPositiveVoltage.
StabilityClass classify_point(const GridModel& model, const VectorXd& v_load,
                              double relative_tol = 1e-9);

// 1/2 h(lambda)^{-1} [lambda] (I_L* + r 1). Errors: LambdaNotInLambda1,
// InvalidArgument (r < 0).
VectorXd param_to_voltage(const GridModel& model, const StabilityParam& param);

// Inverse of param_to_voltage on the closure of D. Errors: NotSemiStable,
// NonPositiveVoltage.
StabilityParam voltage_to_param(const GridModel& model, const VectorXd& v_load,
                                double relative_tol = 1e-9);

// phi(lambda) = 1/2 h(lambda)^{-1} [lambda] I_L*, the boundary operating point
// for direction lambda. Scale invariant. Errors: LambdaNotInLambda.
VectorXd phi(const GridModel& model, const VectorXd& lambda);

bool in_lambda(const GridModel& model, const VectorXd& lambda);

// Uniform draw from the positive simplex, rejected unless h is positive
// definite. After max_rejections failed draws the last proposal is pulled
// toward the simplex centre (which always lies in Lambda_1) until accepted.
VectorXd sample_lambda1(const GridModel& model, std::mt19937_64& rng, int max_rejections = 1000);

}  // namespace gridfeas::stability
