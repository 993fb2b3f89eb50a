#include "gridfeas/grid.hpp"

#include "gridfeas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace gridfeas {

namespace {

using nlohmann::json;

std::unordered_map<std::string, std::size_t> index_by_id(const GridSpec& spec) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) index.emplace(spec.nodes[i].id, i);
  return index;
}

// Loads first in spec order, then sources in spec order.
std::vector<std::size_t> model_order(const GridSpec& spec) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (spec.nodes[i].kind == NodeKind::Load) order.push_back(i);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (spec.nodes[i].kind == NodeKind::Source) order.push_back(i);
  return order;
}

// Connected components over the nodes selected by `keep`, in order of their
// smallest member.
std::vector<std::vector<std::size_t>> components(const std::vector<std::vector<std::size_t>>& adj,
                                                 const std::vector<bool>& keep) {
  const std::size_t count = adj.size();
  std::vector<bool> seen(count, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < count; ++start) {
    if (!keep[start] || seen[start]) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (std::size_t v : adj[u]) {
        if (keep[v] && !seen[v]) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

void check_spec(const GridSpec& spec) {
  std::set<std::string> ids;
  std::size_t loads = 0;
  std::size_t sources = 0;
  for (const auto& node : spec.nodes) {
    if (node.id.empty()) throw Error(ErrorCode::InvalidSpec, "node with empty id");
    if (!ids.insert(node.id).second) throw Error(ErrorCode::InvalidSpec, "duplicate node id '" + node.id + "'");
    if (node.kind == NodeKind::Source) {
      ++sources;
      if (!node.voltage) throw Error(ErrorCode::InvalidSpec, "source '" + node.id + "' has no voltage");
      if (!std::isfinite(*node.voltage) || *node.voltage <= 0.0)
        throw Error(ErrorCode::InvalidSpec, "source '" + node.id + "' voltage must be positive");
    } else {
      ++loads;
      if (node.voltage) throw Error(ErrorCode::InvalidSpec, "load '" + node.id + "' must not carry a voltage");
    }
  }
  if (loads == 0) throw Error(ErrorCode::InvalidSpec, "grid has no load");
  if (sources == 0) throw Error(ErrorCode::InvalidSpec, "grid has no source");

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& line : spec.lines) {
    if (!ids.count(line.from) || !ids.count(line.to))
      throw Error(ErrorCode::InvalidSpec, "line " + line.from + "-" + line.to + " references an unknown node");
    if (line.from == line.to) throw Error(ErrorCode::InvalidSpec, "self-loop at '" + line.from + "'");
    if (!std::isfinite(line.conductance) || line.conductance <= 0.0)
      throw Error(ErrorCode::InvalidSpec, "line " + line.from + "-" + line.to + " conductance must be positive");
    auto key = std::minmax(line.from, line.to);
    if (!pairs.emplace(key.first, key.second).second)
      throw Error(ErrorCode::InvalidSpec, "duplicate line " + line.from + "-" + line.to);
  }
}

ConnectivityReport validate_connectivity(const GridSpec& spec) {
  const auto order = model_order(spec);
  const std::size_t total = order.size();
  std::vector<std::size_t> position(spec.nodes.size());
  for (std::size_t k = 0; k < total; ++k) position[order[k]] = k;
  const auto index = index_by_id(spec);

  std::vector<std::vector<std::size_t>> adj(total);
  for (const auto& line : spec.lines) {
    const std::size_t a = position[index.at(line.from)];
    const std::size_t b = position[index.at(line.to)];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  ConnectivityReport report;
  report.connected = components(adj, std::vector<bool>(total, true)).size() == 1;

  std::vector<bool> is_load(total, false);
  for (std::size_t k = 0; k < total; ++k) is_load[k] = spec.nodes[order[k]].kind == NodeKind::Load;
  // Loads occupy the first positions, so node positions are load indices.
  report.load_components = components(adj, is_load);
  return report;
}

GridModel build_model(const GridSpec& spec, const BuildOptions& options) {
  check_spec(spec);
  auto connectivity = validate_connectivity(spec);
  if (!connectivity.connected) throw Error(ErrorCode::DisconnectedGraph, "grid graph is not connected");
  if (connectivity.load_components.size() > 1 && !options.allow_reducible_loads) {
    std::ostringstream msg;
    msg << "load subgraph has " << connectivity.load_components.size() << " components";
    throw LoadSubgraphReducibleError(msg.str(), connectivity.load_components);
  }

  GridModel model;
  model.spec_ = spec;
  model.load_components_ = std::move(connectivity.load_components);

  const auto order = model_order(spec);
  std::vector<std::size_t> position(spec.nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    position[order[k]] = k;
    const auto& node = spec.nodes[order[k]];
    if (node.kind == NodeKind::Load) {
      model.load_ids_.push_back(node.id);
      model.load_spec_index_.push_back(order[k]);
    } else {
      model.source_ids_.push_back(node.id);
      model.source_spec_index_.push_back(order[k]);
    }
  }
  const Index n = model.load_count();
  const Index m = model.source_count();
  const Index total = n + m;

  const auto index = index_by_id(spec);
  MatrixXd y = MatrixXd::Zero(total, total);
  for (const auto& line : spec.lines) {
    const auto a = static_cast<Index>(position[index.at(line.from)]);
    const auto b = static_cast<Index>(position[index.at(line.to)]);
    y(a, b) -= line.conductance;
    y(b, a) -= line.conductance;
    y(a, a) += line.conductance;
    y(b, b) += line.conductance;
  }

  const double row_tol = 1e-9 * y.diagonal().maxCoeff();
  if ((y * VectorXd::Ones(total)).cwiseAbs().maxCoeff() > row_tol)
    throw Error(ErrorCode::InvalidSpec, "Kirchhoff matrix rows do not sum to zero");

  model.y_ = y;
  model.y_ll_ = y.topLeftCorner(n, n);
  model.y_ls_ = y.topRightCorner(n, m);
  model.y_ss_ = y.bottomRightCorner(m, m);
  model.v_s_.resize(m);
  for (Index j = 0; j < m; ++j) model.v_s_[j] = *spec.nodes[model.source_spec_index_[j]].voltage;

  model.i_star_ = -model.y_ls_ * model.v_s_;
  Eigen::LLT<MatrixXd> llt(model.y_ll_);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidSpec, "load block of the Kirchhoff matrix is not positive definite");
  model.v_star_ = llt.solve(model.i_star_);

  if ((model.v_star_.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidSpec, "open-circuit voltages are not positive");
  if ((model.i_star_.array() < 0.0).any() || model.i_star_.maxCoeff() <= 0.0)
    throw Error(ErrorCode::InvalidSpec, "source-injected currents are not nonnegative and nonzero");
  return model;
}

// ---------------------------------------------------------------------------
// Grid file I/O

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidSpec, std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error(ErrorCode::InvalidSpec, "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T required(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) throw Error(ErrorCode::InvalidSpec, std::string("missing '") + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("bad '") + key + "' in " + where + ": " + e.what());
  }
}

}  // namespace

GridSpec grid_spec_from_json(const json& doc) {
  reject_unknown_keys(doc, {"nodes", "lines"}, "grid");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    throw Error(ErrorCode::InvalidSpec, "grid needs a 'nodes' array");
  if (!doc.contains("lines") || !doc.at("lines").is_array())
    throw Error(ErrorCode::InvalidSpec, "grid needs a 'lines' array");

  GridSpec spec;
  for (const auto& node : doc.at("nodes")) {
    reject_unknown_keys(node, {"id", "kind", "voltage"}, "node");
    NodeSpec out;
    out.id = required<std::string>(node, "id", "node");
    const auto kind = required<std::string>(node, "kind", "node");
    if (kind == "load") {
      out.kind = NodeKind::Load;
    } else if (kind == "source") {
      out.kind = NodeKind::Source;
    } else {
      throw Error(ErrorCode::InvalidSpec, "node kind must be 'load' or 'source', got '" + kind + "'");
    }
    if (node.contains("voltage")) out.voltage = required<double>(node, "voltage", "node");
    spec.nodes.push_back(std::move(out));
  }
  for (const auto& line : doc.at("lines")) {
    reject_unknown_keys(line, {"from", "to", "conductance"}, "line");
    spec.lines.push_back({required<std::string>(line, "from", "line"), required<std::string>(line, "to", "line"),
                          required<double>(line, "conductance", "line")});
  }
  check_spec(spec);
  return spec;
}

json grid_spec_to_json(const GridSpec& spec) {
  json nodes = json::array();
  for (const auto& node : spec.nodes) {
    json n = {{"id", node.id}, {"kind", node.kind == NodeKind::Load ? "load" : "source"}};
    if (node.voltage) n["voltage"] = *node.voltage;
    nodes.push_back(std::move(n));
  }
  json lines = json::array();
  for (const auto& line : spec.lines)
    lines.push_back({{"from", line.from}, {"to", line.to}, {"conductance", line.conductance}});
  return {{"nodes", std::move(nodes)}, {"lines", std::move(lines)}};
}

GridSpec load_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open grid file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, "grid file " + path.string() + " is not valid JSON: " + e.what());
  }
  return grid_spec_from_json(doc);
}

}  // namespace gridfeas
