#pragma once

#include "gridfeas/grid.hpp"
#include "gridfeas/types.hpp"

#include <optional>
#include <vector>

namespace gridfeas::powerflow {

enum class Positivity { Strict, Unrestricted };

// P_c(V_L) = [V_L] Y_LL (V_L* - V_L): the demand met at steady state by V_L.
// Strict mode throws NonPositiveVoltage unless V_L > 0.
DemandVector demand_of(const GridModel& model, const VectorXd& v_load,
                       Positivity mode = Positivity::Strict);

// P_L(V_L) = [V_L] Y_LL (V_L - V_L*) = -demand_of.
VectorXd eval_injection(const GridModel& model, const VectorXd& v_load);

// d P_c / d V_L = [Y_LL (V_L* - V_L)] - [V_L] Y_LL.
MatrixXd jacobian(const GridModel& model, const VectorXd& v_load);

struct MaxDemand {
  DemandVector demand;  // 1/4 [V_L*] I_L*
  VectorXd voltage;     // V_L* / 2
};

MaxDemand p_max(const GridModel& model);

struct Dissipation {
  double full = 0.0;     // V^T Y V with V = (V_L, V_S)
  double reduced = 0.0;  // -1^T P_c + V_S^T Y_SS V_S - V_L^T I_L*
};

// Reduced form evaluated with the demand met by v_load.
Dissipation dissipation(const GridModel& model, const VectorXd& v_load);
// Reduced form evaluated with a caller-supplied demand; the two forms agree
// only when v_load is an operating point for that demand.
Dissipation dissipation(const GridModel& model, const VectorXd& v_load, const DemandVector& demand);

// Both quadratic branches for a single load, positive roots only, highest
// voltage first. Empty when the discriminant is negative; a discriminant
// within 1e-12 (V_L*/2)^2 of zero gives the single root V_L*/2.
// Errors: NotSingleLoad.
std::vector<double> solve_single_load(const GridModel& model, double demand);

struct OracleConfig {
  int points_per_axis = 15;
  double dedup_distance = 1e-6;
  double residual_tolerance = 1e-10;
  double min_voltage = 1e-10;
  int max_newton_iterations = 60;
  static constexpr Index max_loads = 4;
};

// Brute-force multistart Newton over a dense grid of starting voltages in
// (0, 2 max V_L*]^n. Solutions are deduplicated, residual-checked and sorted
// lexicographically in descending order. No completeness claim beyond the
// grid density. Errors: OracleScaleExceeded (n > 4).
std::vector<VectorXd> enumerate_solutions(const GridModel& model, const DemandVector& demand,
                                          const OracleConfig& config = {});

double residual_inf(const GridModel& model, const VectorXd& v_load, const DemandVector& demand);

}  // namespace gridfeas::powerflow
