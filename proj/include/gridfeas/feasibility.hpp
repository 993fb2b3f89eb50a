#pragma once

#include "gridfeas/grid.hpp"
#include "gridfeas/types.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace gridfeas::feasibility {

// Supporting half-space {y : lambda^T y <= s} of the feasible set, with its
// unique point of support.
struct HalfspaceCertificate {
  VectorXd lambda;
  double s = 0.0;
  DemandVector support;
};

struct InteriorVerdict {
  OperatingPoint point;
  double perron_root = 0.0;
};

struct BoundaryVerdict {
  OperatingPoint point;
  VectorXd lambda;
  double perron_root = 0.0;
};

struct InfeasibleVerdict {
  double theta_star = 0.0;
  DemandVector boundary_demand;  // theta_star * target
  VectorXd boundary_voltage;
  double perron_root = 0.0;  // at the boundary point
  HalfspaceCertificate certificate;
};

using FeasibilityVerdict = std::variant<InteriorVerdict, BoundaryVerdict, InfeasibleVerdict>;

struct TraceSample {
  double theta = 0.0;
  VectorXd voltage;
  double perron_root = 0.0;
};

// Accepted continuation samples, theta strictly increasing.
struct ContinuationTrace {
  std::vector<TraceSample> samples;
};

struct ContinuationOptions {
  double initial_step = 1e-2;
  double min_step = 1e-12;
  double max_step = 0.25;
  // Newton corrector stops at ||P_c(V) - theta target||_inf <= tol * (1 + ||target||_inf).
  double corrector_tolerance = 1e-10;
  int max_corrector_iterations = 12;
  // Relative tolerance of the M-matrix classification, tol * (1 + ||J||_inf).
  double m_tolerance = 1e-9;
  // |theta* - 1| below this counts as reaching the boundary exactly.
  double boundary_theta_tolerance = 1e-9;
  // Below this step size a failed step triggers the fold-point solve.
  double fold_trigger_step = 1e-4;
  int max_steps = 100'000;
};

struct SolveResult {
  FeasibilityVerdict verdict;
  ContinuationTrace trace;
};

// Tracks P_c(gamma(theta)) = theta target from gamma(0) = V_L* with an RK4
// predictor on gamma' = J^{-1} target and a Newton corrector, monitoring the
// Perron root of -J^T along the way. Errors: StepSizeUnderflow.
SolveResult solve_operating_point(const GridModel& model, const DemandVector& target,
                                  const ContinuationOptions& options = {});

struct RayCrossing {
  double t_star = 0.0;  // crossing at t_star * direction (+ anchor)
  DemandVector demand;
  VectorXd voltage;
  VectorXd lambda;
  double perron_root = 0.0;
};

struct RayOptions {
  ContinuationOptions continuation;
  int max_doublings = 32;
};

// First crossing of the feasible-set boundary along anchor + t direction,
// t >= 0. The anchor must be feasible (zero by default). Errors:
// NoCrossingFound, InvalidArgument (zero direction).
RayCrossing ray_boundary(const GridModel& model, const VectorXd& direction,
                         const RayOptions& options = {});
RayCrossing ray_boundary(const GridModel& model, const VectorXd& anchor, const VectorXd& direction,
                         const RayOptions& options = {});

struct BoundaryVertex {
  double alpha = 0.0;  // polar angle of the boundary demand
  DemandVector demand;
  VectorXd voltage;
  VectorXd lambda;
  double perron_root = 0.0;
};

struct ScanOptions {
  RayOptions ray;
  // Extra rays anchored at interior offsets that follow the unbounded tails
  // on both ends of the scan.
  int tail_rays = 0;
  // Worker cap; 0 means GRIDFEAS_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

// Two-load boundary polyline. `rays` origin rays at angles
// -pi/4 + (k + 1/2) pi / rays, sorted by alpha. Errors: NotTwoLoads,
// InvalidArgument (rays < 4).
std::vector<BoundaryVertex> boundary_scan(const GridModel& model, int rays,
                                          const ScanOptions& options = {});

// s = ||phi(lambda)||^2_{h(lambda)} and support = P_c(phi(lambda)).
// Errors: LambdaNotInLambda.
HalfspaceCertificate halfspace_value(const GridModel& model, const VectorXd& lambda);

enum class LmiVerdict { PositiveDefinite, PsdSingular, Indefinite };

struct LmiCertificate {
  VectorXd nu;
  MatrixXd matrix;  // [[2 h(nu), [nu] I*], [([nu] I*)^T, 2 nu^T P_c]]
  LmiVerdict verdict = LmiVerdict::Indefinite;
  double min_eigenvalue = 0.0;
};

// Errors: NonPositiveNu.
LmiCertificate assemble_lmi(const GridModel& model, const VectorXd& nu, const DemandVector& target,
                            double relative_tol = 1e-9);

// nullopt for interior demands; otherwise the LMI assembled at the boundary
// Perron vector.
std::optional<LmiCertificate> certify_infeasible(const GridModel& model, const DemandVector& target,
                                                 const ContinuationOptions& options = {});
std::optional<LmiCertificate> certify_from_verdict(const GridModel& model, const DemandVector& target,
                                                   const FeasibilityVerdict& verdict);

std::string_view to_string(LmiVerdict v);
std::string_view verdict_name(const FeasibilityVerdict& v);

}  // namespace gridfeas::feasibility
