// Acceptance suite: one PASS/FAIL line per criterion.

#include "gridfeas/errors.hpp"
#include "gridfeas/feasibility.hpp"
#include "gridfeas/powerflow.hpp"
#include "gridfeas/specmat.hpp"
#include "gridfeas/stability.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace gridfeas;
using namespace gridfeas::feasibility;
using gridfeas::testing::vec;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  // Records the first failure only; later ones add nothing readable.
  void require(bool ok, const std::string& what) {
    if (!ok && passed) detail << "failed: " << what << "; ";
    passed = passed && ok;
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds; 0 for none
  std::function<void(Outcome&)> body;
};

double inf_norm(const VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

// Random direction with 1^T d > 0, so the ray from the origin must leave F.
VectorXd exiting_direction(std::mt19937_64& rng, Index n) {
  while (true) {
    VectorXd d = testing::random_direction(rng, n);
    if (d.sum() > 0.05) return d;
  }
}

VectorXd interior_demand(const GridModel& model, std::mt19937_64& rng) {
  const auto crossing = ray_boundary(model, exiting_direction(rng, model.load_count()));
  return std::uniform_real_distribution<double>(0.05, 0.95)(rng) * crossing.demand.values();
}

void criterion1(Outcome& out) {
  const auto model = testing::example1();
  const auto pm = powerflow::p_max(model);
  out.require(std::abs(pm.demand[0] - 0.75) <= 1e-9, "p_max = 0.75");
  out.require(std::abs(pm.voltage[0] - 0.5) <= 1e-9, "V = 0.5");
  const auto solved = solve_operating_point(model, pm.demand);
  const auto* on = std::get_if<BoundaryVerdict>(&solved.verdict);
  out.require(on && std::abs(on->point.voltages[0] - 0.5) <= 1e-9, "continuation at p_max is Boundary at 0.5");
  out.detail << "p_max=" << pm.demand[0] << " V=" << pm.voltage[0];
}

void criterion2(Outcome& out) {
  for (double w12 : {0.0, 2.0, 10.0}) {
    const auto pm = powerflow::p_max(testing::example2(w12));
    out.require(inf_norm(pm.demand.values() - vec({0.75, 0.5})) <= 1e-9, "P_max for w12=" + std::to_string(w12));
    out.require(inf_norm(pm.voltage - vec({0.5, 0.5})) <= 1e-9, "V for w12=" + std::to_string(w12));
  }
  const auto solved = solve_operating_point(testing::example2(2.0), DemandVector(vec({0.75, 0.5})));
  const auto* on = std::get_if<BoundaryVerdict>(&solved.verdict);
  out.require(on && inf_norm(on->point.voltages - vec({0.5, 0.5})) <= 1e-9, "continuation at P_max is Boundary");
  out.detail << "w12 in {0, 2, 10}";
}

void criterion3(Outcome& out) {
  const auto model = testing::example1();
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double p = -2.0 + 2.75 * k / 49.0;
    const auto solved = solve_operating_point(model, DemandVector(vec({p})));
    const double branch = powerflow::solve_single_load(model, p).front();
    VectorXd v;
    if (const auto* in = std::get_if<InteriorVerdict>(&solved.verdict)) v = in->point.voltages;
    else if (const auto* on = std::get_if<BoundaryVerdict>(&solved.verdict)) v = on->point.voltages;
    out.require(v.size() == 1, "verdict at P=" + std::to_string(p) + " has an operating point");
    if (v.size() == 1) worst = std::max(worst, std::abs(v[0] - branch));
  }
  out.require(worst <= 1e-6, "max |V_cont - V_branch| <= 1e-6");

  const auto at_max = solve_operating_point(model, DemandVector(vec({0.75})));
  out.require(std::holds_alternative<BoundaryVerdict>(at_max.verdict), "P=0.75 is Boundary");
  const auto over = solve_operating_point(model, DemandVector(vec({1.0})));
  const auto* inf = std::get_if<InfeasibleVerdict>(&over.verdict);
  out.require(inf && std::abs(inf->theta_star - 0.75) <= 1e-6, "P=1.0 is Infeasible with theta*=0.75");
  out.detail << "max |dV|=" << worst;
  if (inf) out.detail << " theta*=" << inf->theta_star;
}

// Distance from a point to the closed polyline through the vertex demands.
double polyline_distance(const std::vector<BoundaryVertex>& scan, const VectorXd& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < scan.size(); ++k) {
    const VectorXd a = scan[k].demand.values();
    const VectorXd b = scan[k + 1].demand.values();
    const VectorXd ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + t * ab - p).norm());
  }
  return best;
}

void criterion4(Outcome& out) {
  const auto coupled = testing::example2(2.0);
  const auto decoupled = testing::example2(0.0);
  const auto scan = boundary_scan(coupled, 256);
  const auto flat = boundary_scan(decoupled, 256);
  out.require(scan.size() == 256 && flat.size() == 256, "256 vertices per scan");

  double worst_root = 0.0;
  double worst_residual = 0.0;
  for (const auto& v : scan) {
    out.require(stability::classify_point(coupled, v.voltage) == StabilityClass::SemiStableBoundary,
                "vertex classifies SemiStableBoundary");
    worst_root = std::max(worst_root, std::abs(stability::jacobian_perron(coupled, v.voltage).root));
    worst_residual = std::max(worst_residual, powerflow::residual_inf(coupled, v.voltage, v.demand));
  }
  out.require(worst_root <= 1e-6, "|Perron root| <= 1e-6");
  out.require(worst_residual <= 1e-8, "residual <= 1e-8");

  const double dist = polyline_distance(scan, vec({0.75, 0.5}));
  out.require(dist <= 1e-3, "P_max within 1e-3 of the polyline");

  int matched = 0;
  for (std::size_t k = 0; k < scan.size() && k < flat.size(); ++k) {
    if (scan[k].alpha < 0.0 || scan[k].alpha > std::numbers::pi / 2.0) continue;
    ++matched;
    out.require((scan[k].demand.values().array() >= flat[k].demand.values().array() - 1e-9).all(),
                "w12=2 vertex dominates w12=0 vertex at alpha=" + std::to_string(scan[k].alpha));
  }
  out.require(matched > 0, "first-quadrant rays exist");
  out.detail << "max|r|=" << worst_root << " max residual=" << worst_residual << " d(P_max)=" << dist
             << " matched=" << matched;
}

void criterion5(Outcome& out) {
  std::mt19937_64 rng(505);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_identity = 0.0;
  int samples = 0;
  for (int g = 0; g < 20; ++g) {
    const auto model = testing::random_model(rng, {1, 6, 3});
    const Index n = model.load_count();
    for (int k = 0; k < 50; ++k, ++samples) {
      const VectorXd lambda = stability::sample_lambda1(model, rng);
      const auto cert = halfspace_value(model, lambda);
      const VectorXd x = testing::random_vector(rng, n, -2.0, 2.0);
      const double value = lambda.dot(powerflow::demand_of(model, x, powerflow::Positivity::Unrestricted).values());
      worst_excess = std::max(worst_excess, value - cert.s);

      const VectorXd ph = stability::phi(model, lambda);
      const MatrixXd h = stability::h_of(model, lambda);
      const VectorXd gap = ph - x;
      const double identity = ph.dot(h * ph) - gap.dot(h * gap);
      worst_identity = std::max(worst_identity, std::abs(value - identity) / std::max(1.0, std::abs(value)));
    }
  }
  out.require(samples == 1000, "1000 samples");
  out.require(worst_excess <= 1e-9, "lambda^T P_c(x) <= s + 1e-9");
  out.require(worst_identity <= 1e-10, "norm identity to 1e-10 relative");
  out.detail << "max(lambda^T P_c - s)=" << worst_excess << " max identity error=" << worst_identity;
}

void criterion6(Outcome& out) {
  std::mt19937_64 rng(606);
  int certified = 0;
  int clean = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 20; ++g) {
    const auto model = testing::random_model(rng, {1, 6, 3});
    for (int k = 0; k < 5; ++k) {
      const auto crossing = ray_boundary(model, exiting_direction(rng, model.load_count()));
      const DemandVector target(1.1 * crossing.demand.values());
      const auto solved = solve_operating_point(model, target);
      const auto* inf = std::get_if<InfeasibleVerdict>(&solved.verdict);
      out.require(inf != nullptr, "scaled boundary demand is Infeasible");
      if (!inf) continue;
      const double margin = inf->certificate.lambda.dot(target.values()) - inf->certificate.s;
      min_margin = std::min(min_margin, margin);
      const auto lmi = certify_from_verdict(model, target, solved.verdict);
      const bool ok = margin > 0.0 && lmi && lmi->verdict == LmiVerdict::PositiveDefinite;
      out.require(ok, "certificate separates and LMI is PD");
      certified += ok;

      const DemandVector inside(interior_demand(model, rng));
      const auto interior = solve_operating_point(model, inside);
      const bool none = std::holds_alternative<InteriorVerdict>(interior.verdict) &&
                        !certify_from_verdict(model, inside, interior.verdict).has_value();
      out.require(none, "interior demand has no certificate");
      clean += none;
    }
  }
  out.require(certified == 100 && clean == 100, "100 + 100 demands");
  out.detail << "certified=" << certified << " uncertified interior=" << clean << " min margin=" << min_margin;
}

void criterion7(Outcome& out) {
  std::mt19937_64 rng(707);
  int combos = 0;
  int pairs_rejected = 0;
  while (combos < 500) {
    const auto model = testing::random_model(rng, {1, 6, 3});
    for (int k = 0; k < 25; ++k) {
      // Feasible pairs, verified by an Interior verdict; half reach into the
      // unbounded negative part of the set.
      VectorXd pair[2];
      bool verified = true;
      for (auto& p : pair) {
        p = interior_demand(model, rng);
        if (std::bernoulli_distribution(0.5)(rng)) p -= testing::random_vector(rng, model.load_count(), 0.0, 2.0);
        verified = verified &&
                   std::holds_alternative<InteriorVerdict>(solve_operating_point(model, DemandVector(p)).verdict);
      }
      if (!verified) {
        ++pairs_rejected;
        continue;
      }
      const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto solved = solve_operating_point(model, DemandVector(t * pair[0] + (1.0 - t) * pair[1]));
      out.require(!std::holds_alternative<InfeasibleVerdict>(solved.verdict), "convex combination is feasible");
      ++combos;
    }
  }
  out.detail << "combinations=" << combos << " unverified pairs skipped=" << pairs_rejected;
}

void criterion8(Outcome& out) {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int g = 0; g < 20; ++g) {
    const auto model = testing::random_model(rng);
    const Index n = model.load_count();
    for (int k = 0; k < 100; ++k) {
      const VectorXd v = testing::random_vector(rng, n, 0.05, 2.0);
      const double step = 1e-6 * (1.0 + inf_norm(v));
      MatrixXd numeric(n, n);
      for (Index c = 0; c < n; ++c) {
        VectorXd up = v;
        VectorXd down = v;
        up[c] += step;
        down[c] -= step;
        numeric.col(c) = (powerflow::demand_of(model, up).values() - powerflow::demand_of(model, down).values()) /
                         (2.0 * step);
      }
      const MatrixXd analytic = powerflow::jacobian(model, v);
      worst = std::max(worst, (analytic - numeric).lpNorm<Eigen::Infinity>() /
                                  (1.0 + analytic.lpNorm<Eigen::Infinity>()));
    }
  }
  out.require(worst <= 1e-6, "relative finite-difference error <= 1e-6");
  out.detail << "max relative error=" << worst;
}

void criterion9(Outcome& out) {
  std::mt19937_64 rng(909);
  int points = 0;
  int boundary = 0;
  double worst = 0.0;
  while (points < 500) {
    const auto model = testing::random_model(rng);
    for (int k = 0; k < 25; ++k, ++points) {
      // Stable points from the continuation solve, independent of the parametrization.
      const VectorXd p = interior_demand(model, rng);
      const auto solved = solve_operating_point(model, DemandVector(p));
      const auto* in = std::get_if<InteriorVerdict>(&solved.verdict);
      out.require(in && in->point.stability == StabilityClass::Stable, "interior demand gives a stable point");
      if (!in) continue;
      const VectorXd& v = in->point.voltages;
      const VectorXd back = stability::param_to_voltage(model, stability::voltage_to_param(model, v));
      worst = std::max(worst, inf_norm(back - v) / (1.0 + inf_norm(v)));

      const VectorXd lambda = stability::sample_lambda1(model, rng);
      const bool on_boundary =
          stability::classify_point(model, stability::phi(model, lambda)) == StabilityClass::SemiStableBoundary;
      out.require(on_boundary, "phi(lambda) classifies SemiStableBoundary");
      boundary += on_boundary;
    }
  }
  out.require(worst <= 1e-9, "round trip to 1e-9");
  out.detail << "points=" << points << " max round-trip error=" << worst << " phi on boundary=" << boundary;
}

void criterion10(Outcome& out) {
  std::mt19937_64 rng(1010);
  int checked = 0;
  std::size_t max_found = 0;
  for (int g = 0; checked < 50; ++g) {
    const auto model = g == 0 ? testing::example2(2.0) : testing::random_model(rng, {2, 2, 2});
    for (int k = 0; k < 10 && checked < 50; ++k, ++checked) {
      const VectorXd p = interior_demand(model, rng);
      const auto solved = solve_operating_point(model, DemandVector(p));
      const auto* in = std::get_if<InteriorVerdict>(&solved.verdict);
      out.require(in != nullptr, "demand is interior");
      if (!in) continue;
      const VectorXd& v = in->point.voltages;
      const auto solutions = powerflow::enumerate_solutions(model, DemandVector(p));
      max_found = std::max(max_found, solutions.size());
      int stable = 0;
      bool present = false;
      for (const auto& s : solutions) {
        const bool same = (s - v).norm() <= 1e-6;
        present = present || same;
        if (stability::classify_point(model, s) == StabilityClass::Stable) {
          ++stable;
          out.require(same, "only the continuation point is Stable");
        }
        if (same) continue;
        out.require((v.array() >= s.array()).all() && (v - s).norm() > 0.0, "continuation point dominates");
        out.require(v.dot(model.source_currents()) > s.dot(model.source_currents()), "maximizes V^T I*");
      }
      out.require(present, "continuation point is among the oracle solutions");
      out.require(stable == 1, "exactly one Stable solution");
    }
  }
  out.detail << "demands=" << checked << " max solutions found=" << max_found;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Example 1 golden P_max", 1.0, criterion1},
      {2, "Example 2 golden P_max for w12 in {0, 2, 10}", 1.0, criterion2},
      {3, "continuation vs analytic branch, n = 1", 0.0, criterion3},
      {4, "256-ray boundary scan consistency and nesting", 30.0, criterion4},
      {5, "half-space soundness and norm identity", 0.0, criterion5},
      {6, "certificate round trip", 0.0, criterion6},
      {7, "convexity probe", 0.0, criterion7},
      {8, "Jacobian vs central differences", 0.0, criterion8},
      {9, "parametrization round trip and boundary sweep", 0.0, criterion9},
      {10, "oracle cross-check, n = 2", 60.0, criterion10},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0) out.require(seconds < c.time_limit, "runtime under " + std::to_string(c.time_limit) + " s");
    failed += !out.passed;
    std::printf("%s criterion %2d: %s (%.3f s) %s\n", out.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), seconds,
                out.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
