#include "gridfeas/report.hpp"

#include "gridfeas/errors.hpp"
#include "gridfeas/stability.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace gridfeas::report {

using nlohmann::json;
namespace fz = gridfeas::feasibility;

namespace {

json vec(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

VectorXd to_vec(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "expected a numeric array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::InvalidArgument, "expected a numeric array");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

json mat(const MatrixXd& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
  return out;
}

MatrixXd to_mat(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidArgument, "expected a matrix");
  MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) m.row(static_cast<Index>(i)) = to_vec(j[i]).transpose();
  return m;
}

StabilityClass stability_from(const std::string& s) {
  if (s == "Stable") return StabilityClass::Stable;
  if (s == "SemiStableBoundary") return StabilityClass::SemiStableBoundary;
  if (s == "Unstable") return StabilityClass::Unstable;
  throw Error(ErrorCode::InvalidArgument, "unknown stability class '" + s + "'");
}

fz::LmiVerdict lmi_verdict_from(const std::string& s) {
  if (s == "PD") return fz::LmiVerdict::PositiveDefinite;
  if (s == "PSD-singular") return fz::LmiVerdict::PsdSingular;
  if (s == "Indefinite") return fz::LmiVerdict::Indefinite;
  throw Error(ErrorCode::InvalidArgument, "unknown LMI verdict '" + s + "'");
}

json point_json(const OperatingPoint& p) {
  return {{"voltages", vec(p.voltages)}, {"demand", vec(p.demand.values())}, {"stability", to_string(p.stability)}};
}

OperatingPoint point_from(const json& j) {
  return {to_vec(j.at("voltages")), DemandVector(to_vec(j.at("demand"))),
          stability_from(j.at("stability").get<std::string>())};
}

fz::HalfspaceCertificate halfspace_from(const json& j) {
  return {to_vec(j.at("lambda")), j.at("s").get<double>(), DemandVector(to_vec(j.at("support")))};
}

fz::FeasibilityVerdict verdict_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "Interior") return fz::InteriorVerdict{point_from(j.at("point")), j.at("perron_root").get<double>()};
  if (kind == "Boundary")
    return fz::BoundaryVerdict{point_from(j.at("point")), to_vec(j.at("lambda")), j.at("perron_root").get<double>()};
  if (kind == "Infeasible") {
    fz::InfeasibleVerdict v;
    v.theta_star = j.at("theta_star").get<double>();
    v.boundary_demand = DemandVector(to_vec(j.at("boundary_demand")));
    v.boundary_voltage = to_vec(j.at("boundary_voltage"));
    v.perron_root = j.at("perron_root").get<double>();
    v.certificate = halfspace_from(j.at("certificate"));
    return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown verdict kind '" + kind + "'");
}

fz::LmiCertificate lmi_from(const json& j) {
  return {to_vec(j.at("nu")), to_mat(j.at("matrix")), lmi_verdict_from(j.at("verdict").get<std::string>()),
          j.at("min_eigenvalue").get<double>()};
}

// Voltage at which dissipation is reported: the operating point, or the
// boundary point when the demand is infeasible.
const VectorXd& reported_voltage(const fz::FeasibilityVerdict& v) {
  return std::visit(
      [](const auto& x) -> const VectorXd& {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, fz::InfeasibleVerdict>) return x.boundary_voltage;
        else return x.point.voltages;
      },
      v);
}

double rel_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))); }

}  // namespace

GridSummary summarize(const GridModel& model) {
  return {model.load_count(), model.source_count(), model.load_ids(), model.open_circuit_voltages(),
          model.source_currents(), powerflow::p_max(model).demand.values()};
}

AnalysisReport analyze(const GridModel& model, const DemandVector& demand, const AnalysisOptions& options) {
  fz::ContinuationOptions copt;
  copt.m_tolerance = options.tolerance;
  auto solved = fz::solve_operating_point(model, demand, copt);

  AnalysisReport report;
  report.grid = model.spec();
  report.summary = summarize(model);
  report.demand = demand;
  report.tolerance = options.tolerance;
  report.verdict = solved.verdict;
  const VectorXd& v = reported_voltage(report.verdict);
  report.dissipation = powerflow::dissipation(model, v);
  report.lmi = fz::certify_from_verdict(model, demand, report.verdict);
  if (options.trace) report.trace = std::move(solved.trace);

  if (options.oracle) {
    OracleComparison cmp;
    cmp.solutions = powerflow::enumerate_solutions(model, demand);
    for (const auto& s : cmp.solutions) cmp.stability.push_back(stability::classify_point(model, s, options.tolerance));
    if (!std::holds_alternative<fz::InfeasibleVerdict>(report.verdict)) {
      for (std::size_t i = 0; i < cmp.solutions.size(); ++i) {
        if ((cmp.solutions[i] - v).lpNorm<Eigen::Infinity>() <= 1e-6) {
          cmp.continuation_index = i;
          break;
        }
      }
    }
    report.oracle = std::move(cmp);
  }
  return report;
}

json to_json(const GridSummary& s) {
  return {{"n", s.loads}, {"m", s.sources}, {"load_ids", s.load_ids}, {"v_star", vec(s.v_star)},
          {"i_star", vec(s.i_star)}, {"p_max", vec(s.p_max)}};
}

json to_json(const fz::HalfspaceCertificate& c) {
  return {{"lambda", vec(c.lambda)}, {"s", c.s}, {"support", vec(c.support.values())}};
}

json to_json(const fz::FeasibilityVerdict& verdict) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, fz::InteriorVerdict>) {
          return {{"kind", "Interior"}, {"point", point_json(x.point)}, {"perron_root", x.perron_root}};
        } else if constexpr (std::is_same_v<T, fz::BoundaryVerdict>) {
          return {{"kind", "Boundary"}, {"point", point_json(x.point)}, {"lambda", vec(x.lambda)},
                  {"perron_root", x.perron_root}};
        } else {
          return {{"kind", "Infeasible"},
                  {"theta_star", x.theta_star},
                  {"boundary_demand", vec(x.boundary_demand.values())},
                  {"boundary_voltage", vec(x.boundary_voltage)},
                  {"perron_root", x.perron_root},
                  {"certificate", to_json(x.certificate)}};
        }
      },
      verdict);
}

json to_json(const fz::LmiCertificate& lmi) {
  return {{"nu", vec(lmi.nu)}, {"matrix", mat(lmi.matrix)}, {"verdict", fz::to_string(lmi.verdict)},
          {"min_eigenvalue", lmi.min_eigenvalue}};
}

json to_json(const AnalysisReport& r) {
  json out = {{"grid", grid_spec_to_json(r.grid)},
              {"summary", to_json(r.summary)},
              {"demand", vec(r.demand.values())},
              {"tolerance", r.tolerance},
              {"verdict", to_json(r.verdict)},
              {"dissipation", {{"full", r.dissipation.full}, {"reduced", r.dissipation.reduced}}}};
  out["lmi"] = r.lmi ? to_json(*r.lmi) : json(nullptr);
  if (r.trace) {
    json samples = json::array();
    for (const auto& s : r.trace->samples)
      samples.push_back({{"theta", s.theta}, {"voltage", vec(s.voltage)}, {"perron_root", s.perron_root}});
    out["trace"] = std::move(samples);
  }
  if (r.oracle) {
    json sols = json::array();
    for (std::size_t i = 0; i < r.oracle->solutions.size(); ++i)
      sols.push_back({{"voltages", vec(r.oracle->solutions[i])}, {"stability", to_string(r.oracle->stability[i])}});
    out["oracle"] = {{"solutions", std::move(sols)},
                     {"continuation_index", r.oracle->continuation_index ? json(*r.oracle->continuation_index)
                                                                         : json(nullptr)}};
  }
  return out;
}

AnalysisReport report_from_json(const json& doc) {
  AnalysisReport r;
  r.grid = grid_spec_from_json(doc.at("grid"));
  const auto& s = doc.at("summary");
  r.summary = {s.at("n").get<Index>(), s.at("m").get<Index>(), s.at("load_ids").get<std::vector<std::string>>(),
               to_vec(s.at("v_star")), to_vec(s.at("i_star")), to_vec(s.at("p_max"))};
  r.demand = DemandVector(to_vec(doc.at("demand")));
  r.tolerance = doc.at("tolerance").get<double>();
  r.verdict = verdict_from(doc.at("verdict"));
  r.dissipation = {doc.at("dissipation").at("full").get<double>(), doc.at("dissipation").at("reduced").get<double>()};
  if (doc.contains("lmi") && !doc.at("lmi").is_null()) r.lmi = lmi_from(doc.at("lmi"));
  if (doc.contains("trace")) {
    fz::ContinuationTrace t;
    for (const auto& sample : doc.at("trace"))
      t.samples.push_back({sample.at("theta").get<double>(), to_vec(sample.at("voltage")),
                           sample.at("perron_root").get<double>()});
    r.trace = std::move(t);
  }
  if (doc.contains("oracle")) {
    OracleComparison cmp;
    for (const auto& sol : doc.at("oracle").at("solutions")) {
      cmp.solutions.push_back(to_vec(sol.at("voltages")));
      cmp.stability.push_back(stability_from(sol.at("stability").get<std::string>()));
    }
    const auto& idx = doc.at("oracle").at("continuation_index");
    if (!idx.is_null()) cmp.continuation_index = idx.get<std::size_t>();
    r.oracle = std::move(cmp);
  }
  return r;
}

json pmax_json(const GridModel& model) {
  const auto pm = powerflow::p_max(model);
  return {{"pmax", vec(pm.demand.values())}, {"voltage", vec(pm.voltage)}};
}

std::vector<Check> verify_report(const json& doc) {
  std::vector<Check> checks;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };
  auto fmt = [](double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
  };

  const AnalysisReport r = report_from_json(doc);
  const GridModel model = build_model(r.grid);
  const auto& p = r.demand.values();

  const auto fresh = summarize(model);
  const double summary_gap = std::max({(fresh.v_star - r.summary.v_star).lpNorm<Eigen::Infinity>(),
                                       (fresh.i_star - r.summary.i_star).lpNorm<Eigen::Infinity>(),
                                       (fresh.p_max - r.summary.p_max).lpNorm<Eigen::Infinity>()});
  add("summary", summary_gap <= 1e-12 * (1.0 + fresh.i_star.lpNorm<Eigen::Infinity>()), "gap " + fmt(summary_gap));

  const auto* infeasible = std::get_if<fz::InfeasibleVerdict>(&r.verdict);
  if (!infeasible) {
    const auto& point = std::visit(
        [](const auto& x) -> const OperatingPoint& {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, fz::InfeasibleVerdict>) throw std::logic_error("");
          else return x.point;
        },
        r.verdict);
    const double res = powerflow::residual_inf(model, point.voltages, r.demand);
    add("residual", res <= 1e-8 * (1.0 + p.lpNorm<Eigen::Infinity>()), fmt(res));
    const auto cls = stability::classify_point(model, point.voltages, r.tolerance);
    const auto expected = std::holds_alternative<fz::InteriorVerdict>(r.verdict) ? StabilityClass::Stable
                                                                                 : StabilityClass::SemiStableBoundary;
    add("stability", cls == expected && point.stability == expected, std::string(to_string(cls)));
  } else {
    const double scale = 1.0 + p.lpNorm<Eigen::Infinity>();
    const double ray_gap = (infeasible->boundary_demand.values() - infeasible->theta_star * p).lpNorm<Eigen::Infinity>();
    add("boundary_on_ray", infeasible->theta_star > 0.0 && infeasible->theta_star < 1.0 && ray_gap <= 1e-8 * scale,
        "theta* " + fmt(infeasible->theta_star));
    const double res = powerflow::residual_inf(model, infeasible->boundary_voltage, infeasible->boundary_demand);
    add("boundary_residual", res <= 1e-8 * scale, fmt(res));
    const auto& cert = infeasible->certificate;
    const double s_fresh = fz::halfspace_value(model, cert.lambda).s;
    add("certificate_s", rel_gap(s_fresh, cert.s) <= 1e-9, fmt(s_fresh));
    add("certificate_support", std::abs(cert.lambda.dot(cert.support.values()) - cert.s) <= 1e-9 * (1.0 + std::abs(cert.s)));
    add("certificate_separates", cert.lambda.dot(p) > cert.s,
        "lambda^T P = " + fmt(cert.lambda.dot(p)) + ", s = " + fmt(cert.s));
  }

  const VectorXd& v = reported_voltage(r.verdict);
  const auto diss = powerflow::dissipation(model, v);
  add("dissipation", rel_gap(diss.full, r.dissipation.full) <= 1e-10 && rel_gap(diss.full, diss.reduced) <= 1e-10 &&
                         rel_gap(r.dissipation.full, r.dissipation.reduced) <= 1e-10,
      fmt(diss.full));

  if (std::holds_alternative<fz::InteriorVerdict>(r.verdict)) {
    add("lmi_absent", !r.lmi.has_value());
  } else if (!r.lmi) {
    add("lmi_present", false, "missing certificate");
  } else {
    const auto fresh_lmi = fz::assemble_lmi(model, r.lmi->nu, r.demand, r.tolerance);
    const double entry_gap = (fresh_lmi.matrix - r.lmi->matrix).cwiseAbs().maxCoeff();
    add("lmi_matrix", entry_gap <= 1e-12 * (1.0 + fresh_lmi.matrix.cwiseAbs().maxCoeff()), fmt(entry_gap));
    const auto want = infeasible ? fz::LmiVerdict::PositiveDefinite : fz::LmiVerdict::PsdSingular;
    add("lmi_definiteness", fresh_lmi.verdict == want && r.lmi->verdict == want,
        std::string(fz::to_string(fresh_lmi.verdict)));
  }
  return checks;
}

void write_boundary_csv(std::ostream& out, const std::vector<fz::BoundaryVertex>& vertices) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "alpha,p1,p2,v1,v2,lambda1,lambda2,perron_residual\n";
  for (const auto& v : vertices) {
    out << v.alpha << ',' << v.demand[0] << ',' << v.demand[1] << ',' << v.voltage[0] << ',' << v.voltage[1] << ','
        << v.lambda[0] << ',' << v.lambda[1] << ',' << v.perron_root << '\n';
  }
  out.precision(old_precision);
}

json boundary_json(const std::vector<fz::BoundaryVertex>& vertices) {
  json out = json::array();
  for (const auto& v : vertices)
    out.push_back({{"alpha", v.alpha}, {"demand", vec(v.demand.values())}, {"voltage", vec(v.voltage)},
                   {"lambda", vec(v.lambda)}, {"perron_residual", v.perron_root}});
  return out;
}

VectorXd parse_demand(const std::string& text) {
  json doc;
  try {
    if (!text.empty() && text.front() == '@') {
      std::ifstream in(text.substr(1));
      if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open demand file " + text.substr(1));
      doc = json::parse(in);
      if (doc.is_object()) doc = doc.at("demand");
    } else if (!text.empty() && text.front() == '[') {
      doc = json::parse(text);
    } else {
      doc = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double value = std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        doc.push_back(value);
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse demand '" + text + "': " + e.what());
  }
  VectorXd v = to_vec(doc);
  if (v.size() == 0 || !v.allFinite()) throw Error(ErrorCode::InvalidArgument, "demand must be a nonempty finite list");
  return v;
}

}  // namespace gridfeas::report
