#include "gridfeas/stability.hpp"

#include "gridfeas/errors.hpp"
#include "gridfeas/powerflow.hpp"

#include <cmath>

namespace gridfeas::stability {

namespace {

void require_length(const GridModel& model, const VectorXd& v, const char* what) {
  if (v.size() != model.load_count())
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " length does not match the load count");
}

MatrixXd principal_block(const MatrixXd& a, const std::vector<std::size_t>& idx) {
  const auto k = static_cast<Index>(idx.size());
  MatrixXd block(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) block(i, j) = a(static_cast<Index>(idx[i]), static_cast<Index>(idx[j]));
  return block;
}

}  // namespace

MatrixXd h_of(const GridModel& model, const VectorXd& lambda) {
  require_length(model, lambda, "lambda");
  const auto& y = model.y_ll();
  return 0.5 * (lambda.asDiagonal() * y + y * lambda.asDiagonal());
}

bool in_lambda(const GridModel& model, const VectorXd& lambda) {
  if ((lambda.array() <= 0.0).any()) return false;
  return specmat::is_positive_definite(h_of(model, lambda));
}

Lambda1Membership in_lambda1(const GridModel& model, const VectorXd& lambda, double tol) {
  require_length(model, lambda, "lambda");
  if ((lambda.array() < 0.0).any()) return Lambda1Membership::Outside;
  if (std::abs(lambda.sum() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "lambda must have unit 1-norm");
  const MatrixXd h = h_of(model, lambda);
  const double smallest = specmat::min_symmetric_eigenvalue(h);
  const double band = specmat::default_tolerance(h, tol);
  if (smallest > band) return Lambda1Membership::Interior;
  if (smallest >= -band) return Lambda1Membership::Boundary;
  return Lambda1Membership::Outside;
}

specmat::PerronData jacobian_perron(const GridModel& model, const VectorXd& v_load) {
  const MatrixXd a = -powerflow::jacobian(model, v_load).transpose();
  const auto& comps = model.load_components();
  if (comps.size() == 1) return specmat::perron(a);

  specmat::PerronData best;
  best.root = std::numeric_limits<double>::infinity();
  for (const auto& comp : comps) {
    const auto data = specmat::perron(principal_block(a, comp));
    if (data.root < best.root) {
      best.root = data.root;
      best.vector = VectorXd::Zero(model.load_count());
      for (std::size_t i = 0; i < comp.size(); ++i) best.vector[static_cast<Index>(comp[i])] = data.vector[static_cast<Index>(i)];
    }
  }
  return best;
}

StabilityClass classify_point(const GridModel& model, const VectorXd& v_load, double relative_tol) {
  require_length(model, v_load, "voltage");
  if ((v_load.array() <= 0.0).any()) throw Error(ErrorCode::NonPositiveVoltage, "load voltages must be positive");
  const MatrixXd neg_j = -powerflow::jacobian(model, v_load);
  const auto cls = specmat::classify(neg_j, specmat::default_tolerance(neg_j, relative_tol));
  switch (cls.m_class) {
    case specmat::MClass::NonsingularM: return StabilityClass::Stable;
    case specmat::MClass::SingularM: return StabilityClass::SemiStableBoundary;
    default: return StabilityClass::Unstable;
  }
}

VectorXd param_to_voltage(const GridModel& model, const StabilityParam& param) {
  require_length(model, param.lambda, "lambda");
  if (!(param.r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Perron root parameter must be nonnegative");
  if (in_lambda1(model, param.lambda) != Lambda1Membership::Interior)
    throw Error(ErrorCode::LambdaNotInLambda1, "h(lambda) is not positive definite");
  const MatrixXd h = h_of(model, param.lambda);
  const VectorXd rhs =
      param.lambda.cwiseProduct(model.source_currents() + VectorXd::Constant(model.load_count(), param.r));
  return 0.5 * h.llt().solve(rhs);
}

StabilityParam voltage_to_param(const GridModel& model, const VectorXd& v_load, double relative_tol) {
  if (classify_point(model, v_load, relative_tol) == StabilityClass::Unstable)
    throw Error(ErrorCode::NotSemiStable, "operating point is not long-term voltage semi-stable");
  auto data = jacobian_perron(model, v_load);
  return {std::move(data.vector), std::max(0.0, data.root)};
}

VectorXd phi(const GridModel& model, const VectorXd& lambda) {
  require_length(model, lambda, "lambda");
  if (!in_lambda(model, lambda)) throw Error(ErrorCode::LambdaNotInLambda, "h(lambda) is not positive definite");
  return 0.5 * h_of(model, lambda).llt().solve(lambda.cwiseProduct(model.source_currents()));
}

VectorXd sample_lambda1(const GridModel& model, std::mt19937_64& rng, int max_rejections) {
  const Index n = model.load_count();
  std::exponential_distribution<double> exp1(1.0);
  VectorXd proposal(n);
  for (int attempt = 0; attempt <= max_rejections; ++attempt) {
    for (Index i = 0; i < n; ++i) proposal[i] = exp1(rng);
    proposal /= proposal.sum();
    if (in_lambda(model, proposal)) return proposal;
  }
  const VectorXd centre = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double weight = 0.5;
  while (true) {
    VectorXd candidate = centre + weight * (proposal - centre);
    if (in_lambda(model, candidate)) return candidate / candidate.sum();
    weight *= 0.5;
  }
}

}  // namespace gridfeas::stability
