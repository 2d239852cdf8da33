#pragma once

#include <string>
#include <vector>

#include "rank1/program.hpp"

namespace rank1 {

enum class SolveStatus {
  Optimal,
  InfeasibleCertificate,
  UnboundedCertificate,
  MaxIters,
};

std::string solve_status_name(SolveStatus s);

struct Residuals {
  double primal = 0.0; // ||Ax + s - b|| / (1 + ||b||)
  double dual = 0.0;   // ||A'y + c|| / (1 + ||c||)
  double gap = 0.0;    // |c'x + b'y| / (1 + |c'x| + |b'y|)
};

struct ConeSolution {
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<double> x;
  std::vector<double> s;
  std::vector<double> y_dual;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  Residuals residuals;
  int iters = 0;
  // For Infeasible/Unbounded the certificate ray lives in y_dual / x.
  std::string message;
};

struct SolveOptions {
  double tol = 1e-6;
  int max_iters = 200000;
  int check_interval = 25;
  double relaxation = 1.5; // over-relaxation parameter of the splitting
  int ruiz_iters = 10;
  int adapt_interval = 2000; // primal/dual rebalancing cadence; 0 disables
  Exec exec = Exec::Parallel;
};

/// First-order conic solver: operator splitting (alternating projections onto
/// an affine subspace and the cone product) applied to the homogeneous
/// self-dual embedding of the primal-dual pair. Data is Ruiz-equilibrated
/// before iterating; residuals are always reported on the original data.
ConeSolution solve(const ConeProgram& program, const SolveOptions& opts = {});

/// Recompute the residual triple for a (x, s, y) candidate on the original
/// program data. Used by tests to confirm the stored residuals.
Residuals compute_residuals(const ConeProgram& program, const std::vector<double>& x,
                            const std::vector<double>& s,
                            const std::vector<double>& y_dual);

} // namespace rank1
