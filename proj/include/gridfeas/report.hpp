#pragma once

#include "gridfeas/feasibility.hpp"
#include "gridfeas/grid.hpp"
#include "gridfeas/powerflow.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridfeas::report {

struct GridSummary {
  Index loads = 0;
  Index sources = 0;
  std::vector<std::string> load_ids;
  VectorXd v_star;
  VectorXd i_star;
  VectorXd p_max;
};

struct OracleComparison {
  std::vector<VectorXd> solutions;
  std::vector<StabilityClass> stability;
  // Position of the continuation point among the solutions, if found there.
  std::optional<std::size_t> continuation_index;
};

struct AnalysisReport {
  GridSpec grid;
  GridSummary summary;
  DemandVector demand;
  double tolerance = 1e-9;
  feasibility::FeasibilityVerdict verdict;
  // At the operating point, or at the boundary point for infeasible demands.
  powerflow::Dissipation dissipation;
  std::optional<feasibility::LmiCertificate> lmi;
  std::optional<feasibility::ContinuationTrace> trace;
  std::optional<OracleComparison> oracle;
};

struct AnalysisOptions {
  double tolerance = 1e-9;
  bool trace = false;
  bool oracle = false;
};

GridSummary summarize(const GridModel& model);

// Runs the continuation solve, dissipation, certificate and optional oracle.
// Errors: propagated from the solver; OracleScaleExceeded when oracle is set
// and n > 4.
AnalysisReport analyze(const GridModel& model, const DemandVector& demand, const AnalysisOptions& options = {});

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const GridSummary& summary);
nlohmann::json to_json(const feasibility::FeasibilityVerdict& verdict);
nlohmann::json to_json(const feasibility::LmiCertificate& lmi);
nlohmann::json to_json(const feasibility::HalfspaceCertificate& cert);
nlohmann::json pmax_json(const GridModel& model);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Rebuilds the model from the embedded grid and recomputes residuals,
// certificate inequalities and LMI definiteness from the report alone.
std::vector<Check> verify_report(const nlohmann::json& doc);

// CSV columns: alpha,p1,p2,v1,v2,lambda1,lambda2,perron_residual.
void write_boundary_csv(std::ostream& out, const std::vector<feasibility::BoundaryVertex>& vertices);
nlohmann::json boundary_json(const std::vector<feasibility::BoundaryVertex>& vertices);

// Inline "0.5,0.2", JSON "[0.5, 0.2]", or "@path" to a JSON array or
// {"demand": [...]} document. Throws InvalidArgument on malformed input.
VectorXd parse_demand(const std::string& text);

}  // namespace gridfeas::report
