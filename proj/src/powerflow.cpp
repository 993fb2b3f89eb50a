#include "gridfeas/powerflow.hpp"

#include "gridfeas/errors.hpp"
#include "gridfeas/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gridfeas::powerflow {

DemandVector demand_of(const GridModel& model, const VectorXd& v_load, Positivity mode) {
  if (v_load.size() != model.load_count())
    throw Error(ErrorCode::InvalidArgument, "voltage vector length does not match the load count");
  if (mode == Positivity::Strict && (v_load.array() <= 0.0).any())
    throw Error(ErrorCode::NonPositiveVoltage, "load voltages must be positive");
  return DemandVector(v_load.cwiseProduct(model.y_ll() * (model.open_circuit_voltages() - v_load)));
}

VectorXd eval_injection(const GridModel& model, const VectorXd& v_load) {
  return -demand_of(model, v_load, Positivity::Unrestricted).values();
}

MatrixXd jacobian(const GridModel& model, const VectorXd& v_load) {
  if (v_load.size() != model.load_count())
    throw Error(ErrorCode::InvalidArgument, "voltage vector length does not match the load count");
  const auto& y = model.y_ll();
  MatrixXd j = -(v_load.asDiagonal() * y);
  j.diagonal() += y * (model.open_circuit_voltages() - v_load);
  return j;
}

MaxDemand p_max(const GridModel& model) {
  const auto& v_star = model.open_circuit_voltages();
  return {DemandVector(0.25 * v_star.cwiseProduct(model.source_currents())), 0.5 * v_star};
}

Dissipation dissipation(const GridModel& model, const VectorXd& v_load, const DemandVector& demand) {
  if ((v_load.array() <= 0.0).any()) throw Error(ErrorCode::NonPositiveVoltage, "load voltages must be positive");
  VectorXd v(model.load_count() + model.source_count());
  v << v_load, model.source_voltages();
  const auto& v_s = model.source_voltages();
  Dissipation out;
  out.full = v.dot(model.kirchhoff() * v);
  out.reduced = -demand.values().sum() + v_s.dot(model.y_ss() * v_s) - v_load.dot(model.source_currents());
  return out;
}

Dissipation dissipation(const GridModel& model, const VectorXd& v_load) {
  return dissipation(model, v_load, demand_of(model, v_load));
}

std::vector<double> solve_single_load(const GridModel& model, double demand) {
  if (model.load_count() != 1) throw Error(ErrorCode::NotSingleLoad, "closed form needs exactly one load");
  const double y = model.y_ll()(0, 0);
  const double v_star = model.open_circuit_voltages()[0];
  const double discriminant = (0.25 * y * v_star * v_star - demand) / y;
  std::vector<double> roots;
  const double half = 0.5 * v_star;
  // Within rounding of the double root the demand sits at P_max.
  const double band = 1e-12 * half * half;
  if (discriminant < -band) return roots;
  const double offset = discriminant > band ? std::sqrt(discriminant) : 0.0;
  if (offset == 0.0) {
    roots.push_back(half);
    return roots;
  }
  for (double v : {half + offset, half - offset})
    if (v > 0.0) roots.push_back(v);
  return roots;
}

double residual_inf(const GridModel& model, const VectorXd& v_load, const DemandVector& demand) {
  return (demand_of(model, v_load, Positivity::Unrestricted).values() - demand.values()).lpNorm<Eigen::Infinity>();
}

std::vector<VectorXd> enumerate_solutions(const GridModel& model, const DemandVector& demand,
                                          const OracleConfig& config) {
  const Index n = model.load_count();
  if (n > OracleConfig::max_loads)
    throw Error(ErrorCode::OracleScaleExceeded, "solution enumeration is limited to four loads");
  if (demand.size() != n) throw Error(ErrorCode::InvalidArgument, "demand length does not match the load count");
  if (config.points_per_axis < 1) throw Error(ErrorCode::InvalidArgument, "oracle needs at least one point per axis");

  const auto per_axis = static_cast<std::size_t>(config.points_per_axis);
  std::size_t starts = 1;
  for (Index i = 0; i < n; ++i) starts *= per_axis;
  const double upper = 2.0 * model.open_circuit_voltages().maxCoeff();
  const double spacing = upper / static_cast<double>(per_axis);

  std::vector<std::optional<VectorXd>> found(starts);
  detail::parallel_for(starts, detail::worker_count(), [&](std::size_t start) {
    VectorXd v(n);
    std::size_t code = start;
    for (Index i = 0; i < n; ++i) {
      v[i] = spacing * static_cast<double>(code % per_axis + 1);
      code /= per_axis;
    }
    for (int it = 0; it < config.max_newton_iterations; ++it) {
      const VectorXd f = demand_of(model, v, Positivity::Unrestricted).values() - demand.values();
      if (f.lpNorm<Eigen::Infinity>() <= 0.1 * config.residual_tolerance) break;
      Eigen::PartialPivLU<MatrixXd> lu(jacobian(model, v));
      const VectorXd step = lu.solve(f);
      if (!step.allFinite()) return;
      v -= step;
      if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > 1e6 * upper) return;
    }
    if (residual_inf(model, v, demand) > config.residual_tolerance) return;
    if ((v.array() <= config.min_voltage).any()) return;
    found[start] = v;
  });

  // Merge in starting-index order so the result is independent of scheduling.
  std::vector<VectorXd> solutions;
  for (const auto& candidate : found) {
    if (!candidate) continue;
    const bool duplicate = std::any_of(solutions.begin(), solutions.end(), [&](const VectorXd& s) {
      return (s - *candidate).norm() <= config.dedup_distance;
    });
    if (!duplicate) solutions.push_back(*candidate);
  }
  std::sort(solutions.begin(), solutions.end(), [](const VectorXd& a, const VectorXd& b) {
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  });
  return solutions;
}

}  // namespace gridfeas::powerflow
