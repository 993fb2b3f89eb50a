// gridfeas: feasibility and stability analysis of DC grids with constant
// power loads.
//
// Exit codes: 0 success (any verdict), 1 report verification failed,
// 2 invalid or unsupported grid spec, 3 solver failure, 4 unsupported shape.

#include "gridfeas/errors.hpp"
#include "gridfeas/feasibility.hpp"
#include "gridfeas/grid.hpp"
#include "gridfeas/report.hpp"
#include "gridfeas/specmat.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace gridfeas;
using nlohmann::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kBadSpec = 2, kSolver = 3, kShape = 4 };

struct Args {
  std::string grid;
  std::string demand;
  std::string report;
  std::string format = "csv";
  double tol = 1e-9;
  int rays = 256;
  int tails = 0;
  bool trace = false;
  bool oracle = false;
};

GridSpec read_spec(const std::string& path) {
  try {
    return load_grid_file(path);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed grid file: ") + e.what());
  }
}

void print_components(const GridSpec& spec, const std::vector<std::vector<std::size_t>>& comps) {
  std::vector<std::string> ids;
  for (const auto& node : spec.nodes)
    if (node.kind == NodeKind::Load) ids.push_back(node.id);
  std::cout << "load components: " << comps.size() << '\n';
  for (std::size_t c = 0; c < comps.size(); ++c) {
    std::cout << "  component " << c << ':';
    for (auto i : comps[c]) std::cout << ' ' << ids[i];
    std::cout << '\n';
  }
}

int cmd_validate(const Args& a) {
  const GridSpec spec = read_spec(a.grid);
  check_spec(spec);
  const auto conn = validate_connectivity(spec);
  if (!conn.connected) {
    std::cerr << "error: grid graph is not connected\n";
    return kBadSpec;
  }
  if (conn.load_components.size() > 1) {
    std::cout << "load subgraph is reducible\n";
    print_components(spec, conn.load_components);
    return kBadSpec;
  }
  const GridModel model = build_model(spec);
  const auto cls = specmat::classify(model.y_ll());
  std::cout << "OK\n"
            << "loads: " << model.load_count() << "\nsources: " << model.source_count() << '\n'
            << "row sums: max |sum| " << (model.kirchhoff().rowwise().sum()).cwiseAbs().maxCoeff() << '\n'
            << "Y_LL: Z-matrix " << (cls.is_z ? "yes" : "no") << ", irreducible " << (cls.is_irreducible ? "yes" : "no")
            << ", positive definite " << (specmat::is_positive_definite(model.y_ll()) ? "yes" : "no") << '\n'
            << "V*: min " << model.open_circuit_voltages().minCoeff() << "\nI*: sum "
            << model.source_currents().sum() << '\n';
  return kOk;
}

DemandVector read_demand(const Args& a, const GridModel& model) {
  DemandVector d(report::parse_demand(a.demand));
  if (d.size() != model.load_count())
    throw Error(ErrorCode::InvalidArgument, "demand has " + std::to_string(d.size()) + " entries, grid has " +
                                                std::to_string(model.load_count()) + " loads");
  return d;
}

int cmd_analyze(const Args& a) {
  const GridModel model = build_model(read_spec(a.grid));
  const auto demand = read_demand(a, model);
  report::AnalysisOptions opt;
  opt.tolerance = a.tol;
  opt.trace = a.trace;
  opt.oracle = a.oracle;
  std::cout << report::to_json(report::analyze(model, demand, opt)).dump(2) << '\n';
  return kOk;
}

int cmd_pmax(const Args& a) {
  const GridModel model = build_model(read_spec(a.grid), {.allow_reducible_loads = true});
  std::cout << report::pmax_json(model).dump(2) << '\n';
  return kOk;
}

int cmd_boundary(const Args& a) {
  const GridModel model = build_model(read_spec(a.grid), {.allow_reducible_loads = true});
  feasibility::ScanOptions opt;
  opt.ray.continuation.m_tolerance = a.tol;
  opt.tail_rays = a.tails;
  const auto vertices = feasibility::boundary_scan(model, a.rays, opt);
  if (a.format == "json") std::cout << report::boundary_json(vertices).dump(2) << '\n';
  else report::write_boundary_csv(std::cout, vertices);
  return kOk;
}

int cmd_certify(const Args& a) {
  const GridModel model = build_model(read_spec(a.grid));
  const auto demand = read_demand(a, model);
  feasibility::ContinuationOptions copt;
  copt.m_tolerance = a.tol;
  const auto solved = feasibility::solve_operating_point(model, demand, copt);
  json out;
  if (std::holds_alternative<feasibility::InteriorVerdict>(solved.verdict)) {
    out = {{"result", "feasible"}, {"verdict", report::to_json(solved.verdict)}};
  } else {
    const auto lmi = feasibility::certify_from_verdict(model, demand, solved.verdict);
    out = {{"result", feasibility::to_string(lmi->verdict)},
           {"verdict", report::to_json(solved.verdict)},
           {"lmi", report::to_json(*lmi)}};
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const Args& a) {
  std::ifstream in(a.report);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open report " + a.report);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
  }
  bool ok = true;
  for (const auto& c : report::verify_report(doc)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
    std::cout << '\n';
    ok = ok && c.passed;
  }
  return ok ? kOk : kVerifyFailed;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::DisconnectedGraph:
    case ErrorCode::LoadSubgraphReducible:
      return kBadSpec;
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotTwoLoads:
    case ErrorCode::OracleScaleExceeded:
      return kShape;
    default:
      return kSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasibility and stability of DC grids with constant power loads"};
  app.require_subcommand(1);
  Args a;

  auto grid_opt = [&](CLI::App* sub) { sub->add_option("--grid", a.grid, "Grid JSON file")->required()->check(CLI::ExistingFile); };
  auto demand_opt = [&](CLI::App* sub) {
    sub->add_option("--demand", a.demand, "Demand as a,b,..., a JSON array, or @FILE")->required();
  };
  auto tol_opt = [&](CLI::App* sub) {
    sub->add_option("--tol", a.tol, "Relative M-matrix tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check a grid file and print its invariants");
  grid_opt(validate);

  auto* analyze = app.add_subcommand("analyze", "Solve for the stable operating point and report");
  grid_opt(analyze);
  demand_opt(analyze);
  tol_opt(analyze);
  analyze->add_flag("--trace", a.trace, "Include the continuation trace");
  analyze->add_flag("--oracle", a.oracle, "Compare with all power-flow solutions (n <= 4)");

  auto* pmax = app.add_subcommand("pmax", "Maximal feasible demand and its voltage");
  grid_opt(pmax);

  auto* boundary = app.add_subcommand("boundary", "Boundary polyline of a two-load grid");
  grid_opt(boundary);
  tol_opt(boundary);
  boundary->add_option("--rays", a.rays, "Number of origin rays")->capture_default_str();
  boundary->add_option("--tails", a.tails, "Extra anchored rays per unbounded tail")->capture_default_str();
  boundary->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  auto* certify = app.add_subcommand("certify", "LMI infeasibility certificate or \"feasible\"");
  grid_opt(certify);
  demand_opt(certify);
  tol_opt(certify);

  auto* verify = app.add_subcommand("verify", "Recheck a saved analyze report");
  verify->add_option("report", a.report, "Report JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kShape;
  }

  try {
    if (*validate) return cmd_validate(a);
    if (*analyze) return cmd_analyze(a);
    if (*pmax) return cmd_pmax(a);
    if (*boundary) return cmd_boundary(a);
    if (*certify) return cmd_certify(a);
    if (*verify) return cmd_verify(a);
  } catch (const LoadSubgraphReducibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    print_components(read_spec(a.grid), e.components());
    return kBadSpec;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kShape;
}
