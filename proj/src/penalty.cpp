#include "rank1/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rank1/relaxations.hpp"

namespace rank1 {

void Penalty2DParams::validate() const {
  if (delta1 < 0 || delta2 < 0 || kappa < 0)
    throw std::invalid_argument("penalty parameters must be nonnegative");
}

Normalized2D normalize_2d(double a1, double a12, double a2) {
  if (!(a1 > 0) || !(a2 > 0))
    throw std::invalid_argument("normalize_2d: diagonal entries must be positive");
  if (a12 == 0.0)
    throw std::invalid_argument(
        "normalize_2d: a12 = 0 is separable; use the perspective terms directly");
  if (a1 * a2 < a12 * a12)
    throw std::invalid_argument("normalize_2d: the quadratic form is not PSD");

  const double lo = a12 * a12 / a2; // admissible interval for alpha^2
  const double hi = a1;
  const double alpha_sq = std::clamp(a1 * a12 * a12 / a2, lo, hi);
  Normalized2D out;
  out.alpha = std::sqrt(alpha_sq);
  out.delta1 = a1 / alpha_sq - 1.0;
  out.delta2 = a2 * alpha_sq / (a12 * a12) - 1.0;
  out.delta1 = std::max(out.delta1, 0.0);
  out.delta2 = std::max(out.delta2, 0.0);
  out.flip_sign = a12 < 0;
  return out;
}

double rho_mc_plus_2d(const Eigen::Vector2d& beta, const Penalty2DParams& params) {
  params.validate();
  const double kappa = params.kappa;
  const double d[2] = {params.delta1, params.delta2};
  const double q[2] = {d[0] * beta[0] * beta[0], d[1] * beta[1] * beta[1]};

  if (q[0] <= kappa && q[1] <= kappa) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      s += 2.0 * std::sqrt(kappa * d[i]) * std::abs(beta[i]) - q[i];
    return s;
  }
  if (q[0] <= kappa || q[1] <= kappa) {
    const int i = q[0] <= kappa ? 0 : 1;
    return kappa + 2.0 * std::sqrt(kappa * d[i]) * std::abs(beta[i]) - q[i];
  }
  return 2.0 * kappa;
}

double rho_r1_2d(const Eigen::Vector2d& beta, const Penalty2DParams& params) {
  params.validate();
  const double kappa = params.kappa;
  const double d[2] = {params.delta1, params.delta2};
  const double quad = beta.dot(params.q2() * beta);
  const double cross = 2.0 * std::sqrt(d[0] * d[1]) * std::abs(beta[0] * beta[1]);
  const double root_mix = std::sqrt(d[0]) * std::abs(beta[0]) +
                          std::sqrt(d[1]) * std::abs(beta[1]);
  const double q[2] = {d[0] * beta[0] * beta[0], d[1] * beta[1] * beta[1]};

  if (quad + cross < kappa) return 2.0 * std::sqrt(kappa * (quad + cross)) - quad;
  if (root_mix * root_mix <= kappa) return kappa + cross;
  if (q[0] <= kappa && q[1] <= kappa) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      s += 2.0 * std::sqrt(kappa * d[i]) * std::abs(beta[i]) - q[i];
    return s;
  }
  if (q[0] <= kappa || q[1] <= kappa) {
    const int i = q[0] <= kappa ? 0 : 1;
    return kappa + 2.0 * std::sqrt(kappa * d[i]) * std::abs(beta[i]) - q[i];
  }
  return 2.0 * kappa;
}

double rho_r1_general(const Eigen::VectorXd& beta, int k,
                      const RegressionInstance& instance, const HyperParams& hyper,
                      int r, double tol) {
  const int p = instance.p;
  if (beta.size() != p) throw std::invalid_argument("rho_r1_general: beta length != p");
  if (!beta.allFinite()) throw std::invalid_argument("rho_r1_general: beta not finite");
  if (k < 1 || k > p) throw std::invalid_argument("rho_r1_general: k out of range");
  r = std::min(r, p);

  const Eigen::MatrixXd q = gram(instance, hyper.lambda);
  ProgramBuilder pb;
  std::vector<int> z(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    z[static_cast<std::size_t>(i)] = pb.add_var("z[" + std::to_string(i) + "]");
  Eigen::MatrixXi b_entry(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double coeff = i == j ? q(i, i) : 2.0 * q(i, j);
      const int var = pb.add_var("B", coeff);
      b_entry(i, j) = var;
      b_entry(j, i) = var;
    }

  LinExpr card(static_cast<double>(k));
  for (int i = 0; i < p; ++i) card -= LinExpr::var(z[static_cast<std::size_t>(i)]);
  pb.add_nonneg(card);
  for (int i = 0; i < p; ++i) {
    pb.add_nonneg(LinExpr::var(z[static_cast<std::size_t>(i)]));
    pb.add_nonneg(1.0 - LinExpr::var(z[static_cast<std::size_t>(i)]));
  }

  for (int i = 0; i < p; ++i)
    pb.add_psd({LinExpr::var(z[static_cast<std::size_t>(i)]), LinExpr(beta[i]),
                LinExpr::var(b_entry(i, i))},
               2);

  for (const auto& t : enumerate_subsets(p, 2, r)) {
    const int wv = pb.add_var("w");
    pb.add_nonneg(1.0 - LinExpr::var(wv));
    LinExpr zsum;
    for (int i : t) zsum += LinExpr::var(z[static_cast<std::size_t>(i)]);
    pb.add_nonneg(zsum - LinExpr::var(wv));

    const int ts = static_cast<int>(t.size());
    std::vector<LinExpr> upper;
    upper.push_back(LinExpr::var(wv));
    for (int a = 0; a < ts; ++a) upper.push_back(LinExpr(beta[t[static_cast<std::size_t>(a)]]));
    for (int a = 0; a < ts; ++a)
      for (int c = a; c < ts; ++c)
        upper.push_back(LinExpr::var(
            b_entry(t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(c)])));
    pb.add_psd(upper, ts + 1);
  }

  {
    std::vector<LinExpr> upper;
    upper.push_back(LinExpr(1.0));
    for (int j = 0; j < p; ++j) upper.push_back(LinExpr(beta[j]));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) upper.push_back(LinExpr::var(b_entry(i, j)));
    pb.add_psd(upper, p + 1);
  }

  SolveOptions opts;
  opts.tol = tol;
  const ConeSolution sol = solve(pb.take(), opts);
  if (sol.status != SolveStatus::Optimal) {
    const Residuals& res = sol.residuals;
    if (!(sol.status == SolveStatus::MaxIters && res.primal <= 100 * tol &&
          res.dual <= 100 * tol && res.gap <= 100 * tol))
      throw std::runtime_error("rho_r1_general: solver returned " +
                               solve_status_name(sol.status));
  }
  return sol.primal_obj - beta.dot(q * beta);
}

void write_penalty_grid(std::ostream& os, const Penalty2DParams& params,
                        double lo, double hi, int steps) {
  if (steps < 2) throw std::invalid_argument("penalty grid needs at least 2 steps");
  os << "beta1,beta2,rho_mc_plus,rho_r1\n";
  const double h = (hi - lo) / (steps - 1);
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b < steps; ++b) {
      const Eigen::Vector2d beta(lo + a * h, lo + b * h);
      os << beta[0] << "," << beta[1] << "," << rho_mc_plus_2d(beta, params)
         << "," << rho_r1_2d(beta, params) << "\n";
    }
}

} // namespace rank1
