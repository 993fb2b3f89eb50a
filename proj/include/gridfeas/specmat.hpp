#pragma once

#include <Eigen/Dense>

namespace gridfeas::specmat {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Perron root (eigenvalue of smallest real part) of an irreducible Z-matrix
// together with its positive eigenvector, scaled to unit 1-norm.
struct PerronData {
  double root = 0.0;
  VectorXd vector;
};

enum class MClass { NotM, SingularM, NonsingularM, NotApplicable };

struct MatrixClass {
  bool is_z = false;
  bool is_irreducible = false;
  MClass m_class = MClass::NotApplicable;
  // Smallest real part over the spectrum; only meaningful when is_z.
  double root = 0.0;
};

struct PerronOptions {
  int max_iterations = 10'000;
  double vector_tolerance = 1e-13;
};

// Off-diagonal entries <= tol. tol = 0 is the exact test for assembled data.
bool is_z_matrix(const MatrixXd& a, double tol = 0.0);

// Strong connectivity of the directed graph of nonzero off-diagonal entries.
bool is_irreducible(const MatrixXd& a);

// Errors: NotZMatrix, NotIrreducible, NoConvergence, InvalidArgument (non-square).
PerronData perron(const MatrixXd& a, const PerronOptions& options = {});

// Smallest real part over the spectrum of a Z-matrix, reducible or not. For a
// Z-matrix this eigenvalue is real.
double min_real_eigenvalue(const MatrixXd& a);

// 1e-9 * (1 + ||A||_inf), the tolerance used by classify when none is given.
double default_tolerance(const MatrixXd& a, double relative = 1e-9);

// M-matrix classification from the Perron root with absolute tolerance tol.
// The Z-test inside uses the same tolerance on off-diagonal entries.
MatrixClass classify(const MatrixXd& a, double tol);
MatrixClass classify(const MatrixXd& a);

// Symmetric within 1e-12 relative; throws NotSymmetric otherwise.
bool is_positive_definite(const MatrixXd& a);
// Smallest eigenvalue >= -tol * ||A||.
bool is_positive_semidefinite(const MatrixXd& a, double tol = 1e-12);
double min_symmetric_eigenvalue(const MatrixXd& a);

bool is_symmetric(const MatrixXd& a, double relative_tol = 1e-12);

}  // namespace gridfeas::specmat
