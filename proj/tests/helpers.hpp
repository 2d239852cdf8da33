#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "rank1/instance.hpp"

namespace testutil {

inline rank1::RegressionInstance random_instance(int n, int p, unsigned seed,
                                                 bool do_standardize = true) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  rank1::RegressionInstance inst;
  inst.n = n;
  inst.p = p;
  inst.x.resize(n, p);
  inst.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) inst.x(i, j) = g(rng);
    inst.y[i] = g(rng);
  }
  // plant a sparse signal so relaxations have something to find
  for (int i = 0; i < n; ++i)
    inst.y[i] += inst.x(i, 0) - 0.5 * inst.x(i, std::min(1, p - 1));
  inst.column_means = Eigen::VectorXd::Zero(p);
  inst.column_norms = Eigen::VectorXd::Ones(p);
  return do_standardize ? rank1::standardize(inst) : inst;
}

// Instance whose gram(., lambda=0) equals a prescribed 2x2 PSD matrix.
inline rank1::RegressionInstance instance_with_gram(const Eigen::Matrix2d& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
  Eigen::Matrix2d half = es.operatorSqrt();
  rank1::RegressionInstance inst;
  inst.n = 2;
  inst.p = 2;
  inst.x = half;
  inst.y = Eigen::VectorXd::Zero(2);
  inst.column_means = Eigen::VectorXd::Zero(2);
  inst.column_norms = Eigen::VectorXd::Ones(2);
  return inst;
}

// Minimize a convex function on [lo, hi] by ternary search.
inline double ternary_min(const std::function<double(double)>& f, double lo,
                          double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return f(0.5 * (lo + hi));
}

// -------- independent numeric oracles for the 2-D penalties --------
// These minimize the z-formulations directly (fine grid + ternary
// refinement) and never touch the closed-form branch logic.

// separable term delta b^2 / z with the 0/0 = 0 convention
inline double persp_term(double delta, double b, double z) {
  const double num = delta * b * b;
  if (num == 0.0) return 0.0;
  if (z <= 0.0) return std::numeric_limits<double>::infinity();
  return num / z;
}

// Lagrangean perspective-only penalty: the z-minimization is separable.
inline double numeric_mc_plus(const Eigen::Vector2d& beta, double delta1,
                              double delta2, double kappa) {
  auto coord = [&](double delta, double b) {
    if (delta * b * b == 0.0) return 0.0; // z -> 0 is optimal
    auto f = [&](double z) { return persp_term(delta, b, z) + kappa * z; };
    double best = std::min(f(1.0), ternary_min(f, 1e-9, 1.0));
    // also scan a grid to guard against refinement starting badly
    for (int i = 1; i <= 2000; ++i) best = std::min(best, f(i / 2000.0));
    return best;
  };
  return coord(delta1, beta[0]) + coord(delta2, beta[1]) -
         delta1 * beta[0] * beta[0] - delta2 * beta[1] * beta[1];
}

// Full rank-one penalty in two dimensions, Lagrangean form with multiplier
// kappa: nested ternary over t = z1 + z2 and z1 | t.
inline double numeric_r1(const Eigen::Vector2d& beta, double delta1, double delta2,
                         double kappa) {
  const double b1 = beta[0], b2 = beta[1];
  const Eigen::Matrix2d q = (Eigen::Matrix2d() << 1 + delta1, 1, 1, 1 + delta2).finished();
  const double quad = beta.dot(q * beta);
  if (b1 == 0.0 && b2 == 0.0) return 0.0;

  auto value_at = [&](double z1, double z2) {
    const double t = z1 + z2;
    const double pair_num = (b1 + b2) * (b1 + b2);
    double v = kappa * t;
    if (pair_num > 0.0) {
      const double den = std::min(1.0, t);
      if (den <= 0.0) return std::numeric_limits<double>::infinity();
      v += pair_num / den;
    }
    v += persp_term(delta1, b1, z1) + persp_term(delta2, b2, z2);
    return v;
  };
  auto inner = [&](double t) {
    double lo = std::max(t - 1.0, 0.0), hi = std::min(t, 1.0);
    if (delta1 * b1 * b1 > 0.0) lo = std::max(lo, 1e-12);
    if (delta2 * b2 * b2 > 0.0) hi = std::min(hi, t - 1e-12);
    if (lo >= hi) return value_at(std::clamp(lo, 0.0, t), t - std::clamp(lo, 0.0, t));
    return ternary_min([&](double z1) { return value_at(z1, t - z1); }, lo, hi);
  };
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 400; ++i) best = std::min(best, inner(2.0 * i / 400.0));
  best = std::min(best, ternary_min(inner, 1e-9, 2.0));
  return best - quad;
}

// Cardinality-constrained form of the rank-one penalty (no kappa term),
// minimized over z in [0,1]^2 with z1 + z2 <= k.
inline double numeric_r1_constrained(const Eigen::Vector2d& beta, double delta1,
                                     double delta2, double k) {
  const double b1 = beta[0], b2 = beta[1];
  const Eigen::Matrix2d q = (Eigen::Matrix2d() << 1 + delta1, 1, 1, 1 + delta2).finished();
  const double quad = beta.dot(q * beta);
  if (b1 == 0.0 && b2 == 0.0) return 0.0;

  auto value_at = [&](double z1, double z2) {
    const double t = z1 + z2;
    const double pair_num = (b1 + b2) * (b1 + b2);
    double v = 0.0;
    if (pair_num > 0.0) {
      const double den = std::min(1.0, t);
      if (den <= 0.0) return std::numeric_limits<double>::infinity();
      v += pair_num / den;
    }
    v += persp_term(delta1, b1, z1) + persp_term(delta2, b2, z2);
    return v;
  };
  auto inner = [&](double t) {
    double lo = std::max(t - 1.0, 0.0), hi = std::min(t, 1.0);
    if (delta1 * b1 * b1 > 0.0) lo = std::max(lo, 1e-12);
    if (delta2 * b2 * b2 > 0.0) hi = std::min(hi, t - 1e-12);
    if (lo >= hi) return value_at(std::clamp(lo, 0.0, t), t - std::clamp(lo, 0.0, t));
    return ternary_min([&](double z1) { return value_at(z1, t - z1); }, lo, hi);
  };
  const double tmax = std::min(2.0, k);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 400; ++i) best = std::min(best, inner(tmax * i / 400.0));
  best = std::min(best, ternary_min(inner, 1e-9, tmax));
  return best - quad;
}

} // namespace testutil
