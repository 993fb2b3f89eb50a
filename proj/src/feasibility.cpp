#include "gridfeas/feasibility.hpp"

#include "gridfeas/errors.hpp"
#include "gridfeas/parallel.hpp"
#include "gridfeas/powerflow.hpp"
#include "gridfeas/specmat.hpp"
#include "gridfeas/stability.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gridfeas::feasibility {

namespace {

using powerflow::Positivity;

// Demand path P(theta) = start + theta * delta, theta in [0, 1].
struct Segment {
  VectorXd start;
  VectorXd delta;

  VectorXd at(double theta) const { return start + theta * delta; }
  double scale() const {
    return 1.0 + std::max(start.lpNorm<Eigen::Infinity>(), (start + delta).lpNorm<Eigen::Infinity>());
  }
};

struct Monitor {
  double root = 0.0;
  VectorXd lambda;
  double tolerance = 0.0;  // absolute M-matrix tolerance at this point
};

std::optional<Monitor> monitor(const GridModel& model, const VectorXd& v, double relative_tol) {
  if ((v.array() <= 0.0).any()) return std::nullopt;
  try {
    const MatrixXd j = powerflow::jacobian(model, v);
    auto data = stability::jacobian_perron(model, v);
    return Monitor{data.root, std::move(data.vector), specmat::default_tolerance(j, relative_tol)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

VectorXd tangent(const GridModel& model, const VectorXd& v, const VectorXd& delta) {
  return Eigen::PartialPivLU<MatrixXd>(powerflow::jacobian(model, v)).solve(delta);
}

// Classical RK4 step of gamma' = J(gamma)^{-1} delta.
std::optional<VectorXd> predict(const GridModel& model, const VectorXd& v, const VectorXd& delta, double h) {
  const VectorXd k1 = tangent(model, v, delta);
  const VectorXd k2 = tangent(model, v + 0.5 * h * k1, delta);
  const VectorXd k3 = tangent(model, v + 0.5 * h * k2, delta);
  const VectorXd k4 = tangent(model, v + h * k3, delta);
  VectorXd out = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) return std::nullopt;
  return out;
}

// Newton on P_c(v) = target, keeping v positive.
bool correct(const GridModel& model, const VectorXd& target, double tol, int max_iterations, VectorXd& v) {
  for (int it = 0; it <= max_iterations; ++it) {
    if ((v.array() <= 0.0).any()) return false;
    const VectorXd f = powerflow::demand_of(model, v, Positivity::Unrestricted).values() - target;
    if (!f.allFinite()) return false;
    if (f.lpNorm<Eigen::Infinity>() <= tol) return true;
    if (it == max_iterations) break;
    const VectorXd step = Eigen::PartialPivLU<MatrixXd>(powerflow::jacobian(model, v)).solve(f);
    if (!step.allFinite()) return false;
    v -= step;
  }
  return false;
}

struct FoldPoint {
  double theta = 0.0;
  VectorXd voltage;
  VectorXd lambda;
  double root = 0.0;
};

// Newton on the extended system
//   P_c(v) - P(theta) = 0,  -J(v)^T lambda = 0,  1^T lambda = 1,
// whose solutions are the points where the path meets the boundary of D.
std::optional<FoldPoint> locate_fold(const GridModel& model, const Segment& seg, const VectorXd& v0,
                                     const VectorXd& lambda0, double theta0, double relative_tol) {
  const Index n = model.load_count();
  const Index dim = 2 * n + 1;
  const auto& y = model.y_ll();
  VectorXd z(dim);
  z << v0, lambda0 / lambda0.sum(), theta0;

  auto residual = [&](const VectorXd& state) {
    const VectorXd v = state.head(n);
    const VectorXd lam = state.segment(n, n);
    VectorXd f(dim);
    f.head(n) = powerflow::demand_of(model, v, Positivity::Unrestricted).values() - seg.at(state[dim - 1]);
    f.segment(n, n) = -powerflow::jacobian(model, v).transpose() * lam;
    f[dim - 1] = lam.sum() - 1.0;
    return f;
  };

  VectorXd f = residual(z);
  const double scale = seg.scale();
  for (int it = 0; it < 60; ++it) {
    const VectorXd v = z.head(n);
    const VectorXd lam = z.segment(n, n);
    const MatrixXd j = powerflow::jacobian(model, v);
    MatrixXd jac = MatrixXd::Zero(dim, dim);
    jac.topLeftCorner(n, n) = j;
    jac.block(0, dim - 1, n, 1) = -seg.delta;
    jac.block(n, 0, n, n) = lam.asDiagonal() * y + y * lam.asDiagonal();
    jac.block(n, n, n, n) = -j.transpose();
    jac.block(dim - 1, n, 1, n).setOnes();
    const VectorXd dz = Eigen::FullPivLU<MatrixXd>(jac).solve(f);
    if (!dz.allFinite()) return std::nullopt;

    double alpha = 1.0;
    const double f_norm = f.lpNorm<Eigen::Infinity>();
    VectorXd trial;
    VectorXd f_trial;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      trial = z - alpha * dz;
      f_trial = residual(trial);
      if (f_trial.allFinite() && f_trial.lpNorm<Eigen::Infinity>() < f_norm) break;
    }
    const bool stalled = (alpha * dz).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + z.lpNorm<Eigen::Infinity>());
    z = trial;
    f = f_trial;
    if (stalled) break;
  }

  FoldPoint fold{z[dim - 1], z.head(n), z.segment(n, n), 0.0};
  if (!f.allFinite()) return std::nullopt;
  if ((fold.voltage.array() <= 0.0).any()) return std::nullopt;
  const double p_res = f.head(n).lpNorm<Eigen::Infinity>();
  if (p_res > 1e-10 * scale) return std::nullopt;
  auto mon = monitor(model, fold.voltage, relative_tol);
  if (!mon || std::abs(mon->root) > mon->tolerance) return std::nullopt;
  // Only the Perron direction describes the boundary of D; other kernel
  // directions would come from indefinite h(lambda).
  if ((fold.lambda.array() < -1e-9).any()) return std::nullopt;
  fold.root = mon->root;
  fold.lambda = mon->lambda;
  return fold;
}

struct TraceOutcome {
  enum class Kind { Reached, Fold } kind = Kind::Reached;
  VectorXd voltage;
  double theta = 1.0;
  Monitor at_end;
  ContinuationTrace trace;
};

void finish_at_fold(const GridModel& model, const FoldPoint& fold, double theta, const ContinuationOptions& opt,
                    TraceOutcome& out) {
  out.kind = TraceOutcome::Kind::Fold;
  out.theta = std::clamp(fold.theta, 0.0, 1.0);
  out.voltage = fold.voltage;
  out.at_end = {fold.root, fold.lambda,
                specmat::default_tolerance(powerflow::jacobian(model, fold.voltage), opt.m_tolerance)};
  auto& samples = out.trace.samples;
  if (out.theta > theta) samples.push_back({out.theta, fold.voltage, fold.root});
  else if (samples.back().theta == out.theta) samples.back() = {out.theta, fold.voltage, fold.root};
}

TraceOutcome trace_segment(const GridModel& model, const VectorXd& v0, const Segment& seg,
                           const ContinuationOptions& opt) {
  TraceOutcome out;
  auto first = monitor(model, v0, opt.m_tolerance);
  if (!first) throw Error(ErrorCode::InvalidArgument, "continuation start point is not a positive operating point");
  out.trace.samples.push_back({0.0, v0, first->root});

  VectorXd v = v0;
  double theta = 0.0;
  Monitor current = *first;
  if (seg.delta.lpNorm<Eigen::Infinity>() == 0.0) {
    out.voltage = v;
    out.at_end = current;
    return out;
  }

  const double tol = opt.corrector_tolerance * seg.scale();
  double h = opt.initial_step;
  double fold_tried_at = -1.0;
  int steps = 0;
  while (theta < 1.0) {
    if (++steps > opt.max_steps) throw Error(ErrorCode::StepSizeUnderflow, "continuation step budget exhausted");
    h = std::min({h, opt.max_step, 1.0 - theta});
    double next_theta = theta + h;
    if (1.0 - next_theta < 1e-15) next_theta = 1.0;

    bool accepted = false;
    Monitor next_monitor;
    VectorXd next_v;
    try {
      auto predicted = predict(model, v, seg.delta, next_theta - theta);
      if (predicted) {
        next_v = std::move(*predicted);
        if (correct(model, seg.at(next_theta), tol, opt.max_corrector_iterations, next_v)) {
          if (auto mon = monitor(model, next_v, opt.m_tolerance); mon && mon->root >= -mon->tolerance) {
            next_monitor = std::move(*mon);
            accepted = true;
          }
        }
      }
    } catch (const Error&) {
      accepted = false;
    }

    if (accepted) {
      theta = next_theta;
      v = std::move(next_v);
      current = std::move(next_monitor);
      out.trace.samples.push_back({theta, v, current.root});
      h *= 1.5;
      continue;
    }

    h *= 0.5;
    if (h < opt.fold_trigger_step && fold_tried_at != theta) {
      fold_tried_at = theta;
      auto fold = locate_fold(model, seg, v, current.lambda, theta, opt.m_tolerance);
      if (fold && fold->theta >= theta - opt.boundary_theta_tolerance &&
          fold->theta <= 1.0 + opt.boundary_theta_tolerance) {
        finish_at_fold(model, *fold, theta, opt, out);
        return out;
      }
    }
    if (h < opt.min_step) {
      std::ostringstream msg;
      msg << "continuation stalled at theta = " << theta << " with Perron root " << current.root;
      throw Error(ErrorCode::StepSizeUnderflow, msg.str());
    }
  }
  // The corrector leaves V within about sqrt(tol) of a fold, so a small root
  // at theta = 1 may still be a boundary point. Decide with the fold system.
  const double j_norm = powerflow::jacobian(model, v).lpNorm<Eigen::Infinity>();
  if (current.root <= 1e-3 * (1.0 + j_norm)) {
    auto fold = locate_fold(model, seg, v, current.lambda, 1.0, opt.m_tolerance);
    if (fold && std::abs(fold->theta - 1.0) <= opt.boundary_theta_tolerance) {
      finish_at_fold(model, *fold, 1.0, opt, out);
      return out;
    }
  }
  out.voltage = v;
  out.at_end = current;
  return out;
}

HalfspaceCertificate certificate_at(const GridModel& model, const VectorXd& v_boundary, const VectorXd& lambda) {
  if (stability::in_lambda(model, lambda)) return halfspace_value(model, lambda);
  // Reducible load block: lambda vanishes outside one component, so h(lambda)
  // is only semidefinite. The boundary demand itself is the point of support.
  DemandVector support = powerflow::demand_of(model, v_boundary, Positivity::Unrestricted);
  const double s = lambda.dot(support.values());
  return {lambda, s, std::move(support)};
}

void require_demand(const GridModel& model, const VectorXd& d, const char* what) {
  if (d.size() != model.load_count())
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " length does not match the load count");
  if (!d.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

}  // namespace

SolveResult solve_operating_point(const GridModel& model, const DemandVector& target,
                                  const ContinuationOptions& options) {
  require_demand(model, target.values(), "target");
  const Segment seg{VectorXd::Zero(model.load_count()), target.values()};
  auto outcome = trace_segment(model, model.open_circuit_voltages(), seg, options);

  SolveResult result;
  result.trace = std::move(outcome.trace);
  const bool at_boundary = outcome.kind == TraceOutcome::Kind::Fold
                               ? outcome.theta >= 1.0 - options.boundary_theta_tolerance
                               : outcome.at_end.root <= outcome.at_end.tolerance;
  if (outcome.kind == TraceOutcome::Kind::Reached && !at_boundary) {
    OperatingPoint point{outcome.voltage, target,
                         stability::classify_point(model, outcome.voltage, options.m_tolerance)};
    result.verdict = InteriorVerdict{std::move(point), outcome.at_end.root};
  } else if (at_boundary) {
    OperatingPoint point{outcome.voltage, target, StabilityClass::SemiStableBoundary};
    result.verdict = BoundaryVerdict{std::move(point), outcome.at_end.lambda, outcome.at_end.root};
  } else {
    InfeasibleVerdict inf;
    inf.theta_star = outcome.theta;
    inf.boundary_demand = target.scaled(outcome.theta);
    inf.boundary_voltage = outcome.voltage;
    inf.perron_root = outcome.at_end.root;
    inf.certificate = certificate_at(model, outcome.voltage, outcome.at_end.lambda);
    result.verdict = std::move(inf);
  }
  return result;
}

RayCrossing ray_boundary(const GridModel& model, const VectorXd& direction, const RayOptions& options) {
  return ray_boundary(model, VectorXd::Zero(model.load_count()), direction, options);
}

RayCrossing ray_boundary(const GridModel& model, const VectorXd& anchor, const VectorXd& direction,
                         const RayOptions& options) {
  require_demand(model, direction, "direction");
  require_demand(model, anchor, "anchor");
  if (direction.lpNorm<Eigen::Infinity>() == 0.0) throw Error(ErrorCode::InvalidArgument, "direction must be nonzero");

  VectorXd v = model.open_circuit_voltages();
  if (anchor.lpNorm<Eigen::Infinity>() != 0.0) {
    auto anchored = solve_operating_point(model, DemandVector(anchor), options.continuation);
    const auto* interior = std::get_if<InteriorVerdict>(&anchored.verdict);
    if (!interior) throw Error(ErrorCode::InvalidArgument, "ray anchor is not an interior demand");
    v = interior->point.voltages;
  }

  const double total_max = powerflow::p_max(model).demand.values().sum();
  const double gap = std::max(total_max, total_max - anchor.sum());
  // Directions with 1^T d <= 0 start from a scale relative to ||d||_1.
  const double denom = std::max(direction.sum(), 1e-3 * direction.lpNorm<1>());
  double t_reached = 0.0;
  double t_next = gap / denom;

  for (int k = 0; k <= options.max_doublings; ++k) {
    const Segment seg{anchor + t_reached * direction, (t_next - t_reached) * direction};
    auto outcome = trace_segment(model, v, seg, options.continuation);
    const bool reached = outcome.kind == TraceOutcome::Kind::Reached;
    if (reached && outcome.at_end.root > outcome.at_end.tolerance) {
      v = outcome.voltage;
      t_reached = t_next;
      t_next *= 2.0;
      continue;
    }
    RayCrossing crossing;
    crossing.t_star = reached ? t_next : t_reached + outcome.theta * (t_next - t_reached);
    crossing.demand = DemandVector(anchor + crossing.t_star * direction);
    crossing.voltage = outcome.voltage;
    crossing.lambda = outcome.at_end.lambda;
    crossing.perron_root = outcome.at_end.root;
    return crossing;
  }
  std::ostringstream msg;
  msg << "ray stays feasible up to t = " << t_reached;
  throw Error(ErrorCode::NoCrossingFound, msg.str());
}

std::vector<BoundaryVertex> boundary_scan(const GridModel& model, int rays, const ScanOptions& options) {
  if (model.load_count() != 2) throw Error(ErrorCode::NotTwoLoads, "boundary scan needs exactly two loads");
  if (rays < 4) throw Error(ErrorCode::InvalidArgument, "boundary scan needs at least four rays");

  const auto count = static_cast<std::size_t>(rays);
  std::vector<BoundaryVertex> main(count);
  const unsigned workers = detail::worker_count(options.threads);
  detail::parallel_for(count, workers, [&](std::size_t k) {
    const double alpha = -std::numbers::pi / 4.0 + (static_cast<double>(k) + 0.5) * std::numbers::pi / rays;
    const VectorXd dir = (VectorXd(2) << std::cos(alpha), std::sin(alpha)).finished();
    auto crossing = ray_boundary(model, dir, options.ray);
    main[k] = {alpha, std::move(crossing.demand), std::move(crossing.voltage), std::move(crossing.lambda),
               crossing.perron_root};
  });
  if (options.tail_rays <= 0) return main;

  // Tails: rays along +x anchored below the scan and along +y anchored to its
  // left. Nonpositive demands are feasible, so the anchors are interior.
  double low = 0.0;
  double left = 0.0;
  for (const auto& vertex : main) {
    low = std::min(low, vertex.demand[1]);
    left = std::min(left, vertex.demand[0]);
  }
  const double span = std::max(powerflow::p_max(model).demand.values().sum(), std::max(-low, -left));
  const auto tails = static_cast<std::size_t>(options.tail_rays);
  std::vector<BoundaryVertex> extra(2 * tails);
  detail::parallel_for(2 * tails, workers, [&](std::size_t k) {
    const bool lower = k < tails;
    const double offset = span * static_cast<double>((lower ? k : k - tails) + 1);
    VectorXd anchor = VectorXd::Zero(2);
    VectorXd dir = VectorXd::Zero(2);
    if (lower) {
      anchor[1] = low - offset;
      dir[0] = 1.0;
    } else {
      anchor[0] = left - offset;
      dir[1] = 1.0;
    }
    auto crossing = ray_boundary(model, anchor, dir, options.ray);
    const double alpha = std::atan2(crossing.demand[1], crossing.demand[0]);
    extra[k] = {alpha, std::move(crossing.demand), std::move(crossing.voltage), std::move(crossing.lambda),
                crossing.perron_root};
  });
  main.insert(main.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  std::sort(main.begin(), main.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  main.erase(std::unique(main.begin(), main.end(),
                         [](const auto& a, const auto& b) { return b.alpha - a.alpha <= 1e-12; }),
             main.end());
  return main;
}

HalfspaceCertificate halfspace_value(const GridModel& model, const VectorXd& lambda) {
  const VectorXd point = stability::phi(model, lambda);
  const MatrixXd h = stability::h_of(model, lambda);
  return {lambda, point.dot(h * point), powerflow::demand_of(model, point, Positivity::Unrestricted)};
}

LmiCertificate assemble_lmi(const GridModel& model, const VectorXd& nu, const DemandVector& target,
                            double relative_tol) {
  require_demand(model, nu, "nu");
  require_demand(model, target.values(), "target");
  if ((nu.array() <= 0.0).any()) throw Error(ErrorCode::NonPositiveNu, "nu must be positive");
  const Index n = model.load_count();
  const MatrixXd& y = model.y_ll();
  LmiCertificate cert;
  cert.nu = nu;
  cert.matrix.resize(n + 1, n + 1);
  cert.matrix.topLeftCorner(n, n) = nu.asDiagonal() * y + y * nu.asDiagonal();
  const VectorXd coupling = nu.cwiseProduct(model.source_currents());
  cert.matrix.topRightCorner(n, 1) = coupling;
  cert.matrix.bottomLeftCorner(1, n) = coupling.transpose();
  cert.matrix(n, n) = 2.0 * nu.dot(target.values());

  cert.min_eigenvalue = specmat::min_symmetric_eigenvalue(cert.matrix);
  const double band = specmat::default_tolerance(cert.matrix, relative_tol);
  if (cert.min_eigenvalue > band) {
    cert.verdict = LmiVerdict::PositiveDefinite;
  } else if (cert.min_eigenvalue >= -band) {
    cert.verdict = LmiVerdict::PsdSingular;
  } else {
    cert.verdict = LmiVerdict::Indefinite;
  }
  return cert;
}

std::optional<LmiCertificate> certify_from_verdict(const GridModel& model, const DemandVector& target,
                                                   const FeasibilityVerdict& verdict) {
  if (const auto* b = std::get_if<BoundaryVerdict>(&verdict)) return assemble_lmi(model, b->lambda, target);
  if (const auto* inf = std::get_if<InfeasibleVerdict>(&verdict))
    return assemble_lmi(model, inf->certificate.lambda, target);
  return std::nullopt;
}

std::optional<LmiCertificate> certify_infeasible(const GridModel& model, const DemandVector& target,
                                                 const ContinuationOptions& options) {
  return certify_from_verdict(model, target, solve_operating_point(model, target, options).verdict);
}

std::string_view to_string(LmiVerdict v) {
  switch (v) {
    case LmiVerdict::PositiveDefinite: return "PD";
    case LmiVerdict::PsdSingular: return "PSD-singular";
    case LmiVerdict::Indefinite: return "Indefinite";
  }
  return "Unknown";
}

std::string_view verdict_name(const FeasibilityVerdict& v) {
  return std::visit(
      [](const auto& x) -> std::string_view {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, InteriorVerdict>) return "Interior";
        else if constexpr (std::is_same_v<T, BoundaryVerdict>) return "Boundary";
        else return "Infeasible";
      },
      v);
}

}  // namespace gridfeas::feasibility
