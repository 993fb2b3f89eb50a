#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gridfeas {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class NodeKind { Load, Source };

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::Load;
  std::optional<double> voltage;  // volts; sources only
};

struct LineSpec {
  std::string from;
  std::string to;
  double conductance = 0.0;  // siemens
};

struct GridSpec {
  std::vector<NodeSpec> nodes;
  std::vector<LineSpec> lines;
};

// Throws Error(InvalidSpec) on the first violated structural invariant.
void check_spec(const GridSpec& spec);

struct ConnectivityReport {
  bool connected = false;
  // Connected components of the graph formed by the loads and the lines
  // between them. Indices are load positions (loads-first ordering).
  std::vector<std::vector<std::size_t>> load_components;
};

// Breadth-first reachability over the line pattern. Assumes a structurally
// valid spec (check_spec passes).
ConnectivityReport validate_connectivity(const GridSpec& spec);

struct BuildOptions {
  // A reducible load block is an error by default. Setting this builds the
  // model anyway; the load components are then available from the model and
  // every analysis treats the blocks independently.
  bool allow_reducible_loads = false;
};

// Validated conductance model. Node ordering is loads first (spec order), then
// sources (spec order). Immutable after construction.
class GridModel {
 public:
  Index load_count() const { return static_cast<Index>(load_ids_.size()); }
  Index source_count() const { return static_cast<Index>(source_ids_.size()); }

  const MatrixXd& kirchhoff() const { return y_; }
  const MatrixXd& y_ll() const { return y_ll_; }
  const MatrixXd& y_ls() const { return y_ls_; }
  const MatrixXd& y_ss() const { return y_ss_; }
  const VectorXd& source_voltages() const { return v_s_; }
  // Open-circuit load voltages.
  const VectorXd& open_circuit_voltages() const { return v_star_; }
  // Source-injected currents, -Y_LS V_S.
  const VectorXd& source_currents() const { return i_star_; }

  const std::vector<std::string>& load_ids() const { return load_ids_; }
  const std::vector<std::string>& source_ids() const { return source_ids_; }
  // Index of each load/source in the original spec's node list.
  const std::vector<std::size_t>& load_spec_index() const { return load_spec_index_; }
  const std::vector<std::size_t>& source_spec_index() const { return source_spec_index_; }

  const std::vector<std::vector<std::size_t>>& load_components() const { return load_components_; }
  bool load_block_irreducible() const { return load_components_.size() == 1; }

  const GridSpec& spec() const { return spec_; }

 private:
  friend GridModel build_model(const GridSpec& spec, const BuildOptions& options);

  GridSpec spec_;
  std::vector<std::string> load_ids_;
  std::vector<std::string> source_ids_;
  std::vector<std::size_t> load_spec_index_;
  std::vector<std::size_t> source_spec_index_;
  std::vector<std::vector<std::size_t>> load_components_;
  MatrixXd y_;
  MatrixXd y_ll_;
  MatrixXd y_ls_;
  MatrixXd y_ss_;
  VectorXd v_s_;
  VectorXd v_star_;
  VectorXd i_star_;
};

// Errors: InvalidSpec, DisconnectedGraph, LoadSubgraphReducible
// (LoadSubgraphReducibleError, unless options allow it).
GridModel build_model(const GridSpec& spec, const BuildOptions& options = {});

// Grid file: {"nodes": [{"id", "kind", "voltage"?}], "lines": [{"from", "to",
// "conductance"}]}. Unknown keys are rejected with InvalidSpec.
GridSpec grid_spec_from_json(const nlohmann::json& doc);
nlohmann::json grid_spec_to_json(const GridSpec& spec);
GridSpec load_grid_file(const std::filesystem::path& path);

}  // namespace gridfeas
