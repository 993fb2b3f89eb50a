#include "gridfeas/specmat.hpp"

#include "gridfeas/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <vector>

namespace gridfeas::specmat {

namespace {

void require_square(const MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorCode::InvalidArgument, "matrix must be square and nonempty");
}

// Forward reachability from node 0 over the nonzero off-diagonal pattern of a
// (or of its transpose).
bool reaches_all(const MatrixXd& a, bool transpose) {
  const Index n = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{0};
  seen[0] = true;
  Index count = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v = 0; v < n; ++v) {
      if (v == u || seen[static_cast<std::size_t>(v)]) continue;
      const double entry = transpose ? a(v, u) : a(u, v);
      if (entry != 0.0) {
        seen[static_cast<std::size_t>(v)] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

// Sign-fix and 1-norm normalize; false if the vector is not strictly positive.
bool normalize_positive(VectorXd& v) {
  if (v.sum() < 0.0) v = -v;
  const double norm = v.lpNorm<1>();
  if (!(norm > 0.0)) return false;
  v /= norm;
  return (v.array() > 0.0).all();
}

// Shifted inverse iteration for the eigenvector at the eigenvalue `estimate`.
PerronData inverse_iteration(const MatrixXd& a, double estimate, const PerronOptions& options) {
  const Index n = a.rows();
  const double scale = 1.0 + a.cwiseAbs().rowwise().sum().maxCoeff();
  const double shift = estimate - 1e-10 * scale;
  Eigen::PartialPivLU<MatrixXd> lu(a - shift * MatrixXd::Identity(n, n));
  VectorXd v = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < options.max_iterations; ++it) {
    VectorXd next = lu.solve(v);
    if (!next.allFinite()) break;
    if (next.sum() < 0.0) next = -next;
    next /= next.lpNorm<1>();
    const double change = (next - v).lpNorm<1>();
    v = std::move(next);
    if (change < options.vector_tolerance) {
      if (!normalize_positive(v)) break;
      // Rayleigh-type estimate with the all-ones left vector.
      const double root = (a * v).sum() / v.sum();
      return {root, v};
    }
  }
  throw Error(ErrorCode::NoConvergence, "Perron vector iteration did not converge");
}

}  // namespace

bool is_z_matrix(const MatrixXd& a, double tol) {
  require_square(a);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) > tol) return false;
  return true;
}

bool is_irreducible(const MatrixXd& a) {
  require_square(a);
  if (a.rows() == 1) return true;
  return reaches_all(a, false) && reaches_all(a, true);
}

bool is_symmetric(const MatrixXd& a, double relative_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= relative_tol * scale;
}

PerronData perron(const MatrixXd& a, const PerronOptions& options) {
  require_square(a);
  if (!is_z_matrix(a)) throw Error(ErrorCode::NotZMatrix, "Perron data requires a Z-matrix");
  if (!is_irreducible(a)) throw Error(ErrorCode::NotIrreducible, "Perron data requires an irreducible matrix");
  const Index n = a.rows();
  if (n == 1) return {a(0, 0), VectorXd::Ones(1)};

  if (is_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (a + a.transpose()));
    if (eig.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
    VectorXd v = eig.eigenvectors().col(0);
    if (normalize_positive(v)) return {eig.eigenvalues()[0], v};
    return inverse_iteration(a, eig.eigenvalues()[0], options);
  }
  return inverse_iteration(a, min_real_eigenvalue(a), options);
}

double min_real_eigenvalue(const MatrixXd& a) {
  require_square(a);
  if (a.rows() == 1) return a(0, 0);
  if (is_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
    return eig.eigenvalues()[0];
  }
  Eigen::EigenSolver<MatrixXd> eig(a, false);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigensolver failed");
  return eig.eigenvalues().real().minCoeff();
}

double default_tolerance(const MatrixXd& a, double relative) {
  return relative * (1.0 + a.cwiseAbs().rowwise().sum().maxCoeff());
}

MatrixClass classify(const MatrixXd& a, double tol) {
  require_square(a);
  MatrixClass out;
  out.is_z = is_z_matrix(a, tol);
  out.is_irreducible = is_irreducible(a);
  if (!out.is_z) return out;
  out.root = min_real_eigenvalue(a);
  if (out.root > tol) {
    out.m_class = MClass::NonsingularM;
  } else if (out.root >= -tol) {
    out.m_class = MClass::SingularM;
  } else {
    out.m_class = MClass::NotM;
  }
  return out;
}

MatrixClass classify(const MatrixXd& a) { return classify(a, default_tolerance(a)); }

bool is_positive_definite(const MatrixXd& a) {
  require_square(a);
  if (!is_symmetric(a)) throw Error(ErrorCode::NotSymmetric, "positive definiteness needs a symmetric matrix");
  Eigen::LLT<MatrixXd> llt(0.5 * (a + a.transpose()));
  return llt.info() == Eigen::Success;
}

double min_symmetric_eigenvalue(const MatrixXd& a) {
  require_square(a);
  if (!is_symmetric(a)) throw Error(ErrorCode::NotSymmetric, "expected a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
  return eig.eigenvalues()[0];
}

bool is_positive_semidefinite(const MatrixXd& a, double tol) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  return min_symmetric_eigenvalue(a) >= -tol * norm;
}

}  // namespace gridfeas::specmat
