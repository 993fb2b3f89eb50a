#pragma once

#include "gridfeas/feasibility.hpp"
#include "gridfeas/grid.hpp"
#include "gridfeas/powerflow.hpp"
#include "gridfeas/stability.hpp"

#include <initializer_list>
#include <random>
#include <string>

namespace gridfeas::testing {

inline VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline GridSpec example1_spec() {
  return {{{"l1", NodeKind::Load, {}}, {"s", NodeKind::Source, 1.0}}, {{"l1", "s", 3.0}}};
}

// Two loads and one source; w12 = 0 drops the load-load line.
inline GridSpec example2_spec(double w12) {
  GridSpec spec{{{"l1", NodeKind::Load, {}}, {"l2", NodeKind::Load, {}}, {"s", NodeKind::Source, 1.0}},
                {{"l1", "s", 3.0}, {"l2", "s", 2.0}}};
  if (w12 > 0.0) spec.lines.push_back({"l1", "l2", w12});
  return spec;
}

inline GridModel example1() { return build_model(example1_spec()); }
inline GridModel example2(double w12) { return build_model(example2_spec(w12), {.allow_reducible_loads = w12 == 0.0}); }

struct RandomGridShape {
  int min_loads = 1;
  int max_loads = 6;
  int max_sources = 3;
};

// Loads joined by a random spanning tree (so the load block is irreducible),
// every source attached to at least one load, plus a few extra lines.
inline GridSpec random_spec(std::mt19937_64& rng, const RandomGridShape& shape = {}) {
  std::uniform_int_distribution<int> n_dist(shape.min_loads, shape.max_loads);
  std::uniform_int_distribution<int> m_dist(1, shape.max_sources);
  std::uniform_real_distribution<double> w_dist(0.5, 5.0);
  std::uniform_real_distribution<double> vs_dist(0.9, 1.1);
  const int n = n_dist(rng);
  const int m = m_dist(rng);

  GridSpec spec;
  for (int i = 0; i < n; ++i) spec.nodes.push_back({"l" + std::to_string(i), NodeKind::Load, {}});
  for (int j = 0; j < m; ++j) spec.nodes.push_back({"s" + std::to_string(j), NodeKind::Source, vs_dist(rng)});

  std::vector<std::vector<bool>> used(n + m, std::vector<bool>(n + m, false));
  auto add = [&](int a, int b) {
    if (a == b || used[a][b]) return;
    used[a][b] = used[b][a] = true;
    spec.lines.push_back({spec.nodes[a].id, spec.nodes[b].id, w_dist(rng)});
  };
  for (int i = 1; i < n; ++i) add(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
  for (int j = 0; j < m; ++j) add(n + j, std::uniform_int_distribution<int>(0, n - 1)(rng));
  const int extra = std::uniform_int_distribution<int>(0, n)(rng);
  std::uniform_int_distribution<int> any(0, n + m - 1);
  for (int k = 0; k < extra; ++k) {
    const int a = any(rng);
    const int b = any(rng);
    if (a >= n && b >= n) continue;
    add(a, b);
  }
  return spec;
}

inline GridModel random_model(std::mt19937_64& rng, const RandomGridShape& shape = {}) {
  return build_model(random_spec(rng, shape));
}

inline VectorXd random_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// Unit vector with uniformly random direction.
inline VectorXd random_direction(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal;
  VectorXd v(n);
  do {
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

// A strictly stable operating point from the (lambda, r) parametrization.
inline VectorXd random_stable_point(const GridModel& model, std::mt19937_64& rng) {
  const VectorXd lambda = stability::sample_lambda1(model, rng);
  const double r = std::uniform_real_distribution<double>(0.05, 2.0)(rng) * model.y_ll().diagonal().mean();
  return stability::param_to_voltage(model, {lambda, r});
}

// Symmetric matrix similar to -J(V): [V]^{1/2} Y [V]^{1/2} + diag(Y V - I*).
inline MatrixXd symmetrized_neg_jacobian(const GridModel& model, const VectorXd& v) {
  const VectorXd s = v.cwiseSqrt();
  MatrixXd out = s.asDiagonal() * model.y_ll() * s.asDiagonal();
  out.diagonal() += model.y_ll() * v - model.source_currents();
  return out;
}

}  // namespace gridfeas::testing
