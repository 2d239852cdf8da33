#include "rank1/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace rank1::linalg {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

EigenDecomposition eigendecompose(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigendecompose: not square");
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: iteration did not converge");
  const int n = static_cast<int>(sym.rows());
  EigenDecomposition d;
  d.values.resize(n);
  d.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) { // Eigen reports ascending order
    d.values[i] = es.eigenvalues()[n - 1 - i];
    d.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return d;
}

MatrixXd psd_project(const MatrixXd& m) {
  const auto d = eigendecompose(m);
  const int n = static_cast<int>(d.values.size());
  MatrixXd out = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (d.values[i] <= 0.0) break; // descending order
    out.noalias() += d.values[i] * d.vectors.col(i) * d.vectors.col(i).transpose();
  }
  return 0.5 * (out + out.transpose());
}

MatrixXd sqrt_psd(const MatrixXd& m) {
  const auto d = eigendecompose(m);
  const int n = static_cast<int>(d.values.size());
  MatrixXd out = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (d.values[i] <= 0.0) break;
    out.noalias() +=
        std::sqrt(d.values[i]) * d.vectors.col(i) * d.vectors.col(i).transpose();
  }
  return 0.5 * (out + out.transpose());
}

VectorXd chol_solve(const MatrixXd& m, const VectorXd& rhs, double jitter,
                    bool* jittered) {
  if (jittered) *jittered = false;
  const int n = static_cast<int>(m.rows());
  // a factorization may "succeed" on a numerically singular matrix, so the
  // solution quality is verified before it is trusted
  auto acceptable = [&](const VectorXd& x) {
    const double scale = m.norm() * x.norm() + rhs.norm() + 1e-30;
    return ((m * x - rhs).norm() <= 1e-8 * scale) && x.allFinite();
  };
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    VectorXd x = llt.solve(rhs);
    if (acceptable(x)) return x;
  }
  double j = jitter > 0 ? jitter : 1e-12;
  for (int attempt = 0; attempt < 20; ++attempt, j *= 10.0) {
    llt.compute(m + j * MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      VectorXd x = llt.solve(rhs);
      if (x.allFinite()) {
        if (jittered) *jittered = true;
        return x;
      }
    }
  }
  throw std::runtime_error("chol_solve: matrix is numerically indefinite");
}

int svec_len(int order) { return order * (order + 1) / 2; }

void svec(const MatrixXd& m, double* out) {
  const int n = static_cast<int>(m.rows());
  int k = 0;
  for (int j = 0; j < n; ++j) {
    out[k++] = m(j, j);
    for (int i = j + 1; i < n; ++i) out[k++] = kSqrt2 * m(i, j);
  }
}

MatrixXd smat(const double* v, int order) {
  MatrixXd m(order, order);
  int k = 0;
  for (int j = 0; j < order; ++j) {
    m(j, j) = v[k++];
    for (int i = j + 1; i < order; ++i) {
      const double x = v[k++] / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
    }
  }
  return m;
}

void psd_project_svec(double* v, int order) {
  if (order == 1) {
    if (v[0] < 0.0) v[0] = 0.0;
    return;
  }
  const MatrixXd proj = psd_project(smat(v, order));
  svec(proj, v);
}

} // namespace rank1::linalg
