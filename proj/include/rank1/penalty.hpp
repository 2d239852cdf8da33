#pragma once

#include <iosfwd>

#include <Eigen/Dense>

#include "rank1/instance.hpp"

namespace rank1 {

// Two-dimensional penalty setting: the quadratic form is normalized to
//   [[1 + delta1, 1], [1, 1 + delta2]]
// with diagonal-dominance surpluses delta >= 0 and multiplier kappa >= 0.
struct Penalty2DParams {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double kappa = 1.0;

  Eigen::Matrix2d q2() const {
    Eigen::Matrix2d q;
    q << 1.0 + delta1, 1.0, 1.0, 1.0 + delta2;
    return q;
  }
  void validate() const;
};

struct Normalized2D {
  double alpha = 1.0;     // beta1 scale; beta2 scales by a12/alpha
  double delta1 = 0.0;
  double delta2 = 0.0;
  bool flip_sign = false; // a12 < 0: beta2 flips sign
};

/// Rescale a 2-D quadratic a1 b1^2 + 2 a12 b1 b2 + a2 b2^2 to the normalized
/// unit-cross-term form. alpha^2 is a1 a12^2 / a2 clamped into the admissible
/// interval [a12^2 / a2, a1], which keeps both surpluses nonnegative.
/// a12 = 0 is rejected (separable case, no normalization needed).
Normalized2D normalize_2d(double a1, double a12, double a2);

/// Separable minimax-concave penalty, three-branch closed form.
double rho_mc_plus_2d(const Eigen::Vector2d& beta, const Penalty2DParams& params);

/// Non-separable rank-one penalty, five-branch closed form.
double rho_r1_2d(const Eigen::Vector2d& beta, const Penalty2DParams& params);

/// General rank-one penalty at sparsity budget k: fix beta as data in the
/// lifted SDP, minimize <Q, B> over (z, w, B) with e'z <= k, and subtract
/// beta' Q beta. Nonnegative up to solver tolerance.
double rho_r1_general(const Eigen::VectorXd& beta, int k,
                      const RegressionInstance& instance, const HyperParams& hyper,
                      int r = 2, double tol = 1e-8);

/// CSV surface "beta1,beta2,rho_mc_plus,rho_r1" over a square grid.
void write_penalty_grid(std::ostream& os, const Penalty2DParams& params,
                        double lo, double hi, int steps);

} // namespace rank1
