#pragma once

#include <Eigen/Dense>

namespace rank1::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct EigenDecomposition {
  VectorXd values;  // descending
  MatrixXd vectors; // columns match values
};

/// Spectral decomposition of a symmetric matrix, eigenvalues descending.
/// The input is symmetrized first; non-convergence throws.
EigenDecomposition eigendecompose(const MatrixXd& m);

/// Euclidean projection onto the positive semidefinite cone:
/// clamp negative eigenvalues to zero.
MatrixXd psd_project(const MatrixXd& m);

/// Symmetric square root of a PSD matrix (tiny negative eigenvalues are
/// treated as zero).
MatrixXd sqrt_psd(const MatrixXd& m);

/// Solve (M + jitter I) x = rhs by Cholesky, escalating the jitter by 10x
/// until the factorization succeeds. Flags when a jitter was needed.
VectorXd chol_solve(const MatrixXd& m, const VectorXd& rhs, double jitter,
                    bool* jittered = nullptr);

// Scaled-vector packing of symmetric matrices: column-major lower triangle
// with off-diagonals multiplied by sqrt(2), so that svec(A) . svec(B) = <A,B>.
int svec_len(int order);
void svec(const MatrixXd& m, double* out);
MatrixXd smat(const double* v, int order);

/// In-place projection of an svec-packed block onto the PSD cone.
void psd_project_svec(double* v, int order);

} // namespace rank1::linalg
