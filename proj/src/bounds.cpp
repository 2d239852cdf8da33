#include "rank1/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "rank1/linalg.hpp"

namespace rank1 {

double objective(const Eigen::VectorXd& beta, const RegressionInstance& instance,
                 const HyperParams& hyper) {
  if (beta.size() != instance.p)
    throw std::invalid_argument("objective: beta length must equal p");
  const Eigen::VectorXd resid = instance.y - instance.x * beta;
  return resid.squaredNorm() + hyper.lambda * beta.squaredNorm() +
         hyper.mu * beta.lpNorm<1>();
}

namespace {

// Ridge fit restricted to `support`; mu is handled by exact coordinate
// minimization on top of the ridge start when positive.
Eigen::VectorXd restricted_fit(const RegressionInstance& instance,
                               const HyperParams& hyper,
                               const std::vector<int>& support, double mu,
                               bool* jittered) {
  const int t = static_cast<int>(support.size());
  Eigen::MatrixXd xt(instance.n, t);
  for (int a = 0; a < t; ++a) xt.col(a) = instance.x.col(support[static_cast<std::size_t>(a)]);
  Eigen::MatrixXd g = xt.transpose() * xt;
  g.diagonal().array() += hyper.lambda;
  const Eigen::VectorXd rhs = xt.transpose() * instance.y;
  Eigen::VectorXd bt = linalg::chol_solve(g, rhs, 1e-10, jittered);

  if (mu > 0 && t > 0) {
    // coordinate descent: each step solves its scalar subproblem exactly
    Eigen::VectorXd resid = instance.y - xt * bt;
    const Eigen::VectorXd col_sq = g.diagonal();
    double prev = resid.squaredNorm() + hyper.lambda * bt.squaredNorm() + mu * bt.lpNorm<1>();
    for (int sweep = 0; sweep < 10000; ++sweep) {
      for (int a = 0; a < t; ++a) {
        const double rho = xt.col(a).dot(resid) + (col_sq[a] - hyper.lambda) * bt[a];
        const double denom = col_sq[a];
        double nb = 0.0;
        if (rho > mu / 2)
          nb = (rho - mu / 2) / denom;
        else if (rho < -mu / 2)
          nb = (rho + mu / 2) / denom;
        const double change = nb - bt[a];
        if (change != 0.0) {
          resid -= xt.col(a) * change;
          bt[a] = nb;
        }
      }
      const double cur =
          resid.squaredNorm() + hyper.lambda * bt.squaredNorm() + mu * bt.lpNorm<1>();
      if (std::abs(prev - cur) <= 1e-14 * (1.0 + std::abs(cur))) break;
      prev = cur;
    }
  }
  return bt;
}

std::vector<int> top_k_by_magnitude(const Eigen::VectorXd& beta, int k) {
  const int p = static_cast<int>(beta.size());
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(beta[a]), mb = std::abs(beta[b]);
    if (ma != mb) return ma > mb;
    return a < b; // deterministic tie-break: lower index wins
  });
  std::vector<int> sel(order.begin(), order.begin() + std::min(k, p));
  std::sort(sel.begin(), sel.end());
  return sel;
}

} // namespace

RoundedEstimate greedy_round(const Eigen::VectorXd& beta_relaxed,
                             const RegressionInstance& instance,
                             const HyperParams& hyper) {
  if (!beta_relaxed.allFinite())
    throw std::invalid_argument("greedy_round: relaxed coefficients must be finite");
  hyper.validate(instance.p);
  const std::vector<int> sel = top_k_by_magnitude(beta_relaxed, hyper.k);

  RoundedEstimate out;
  // The restricted refit is the plain ridge estimator; mu enters only when
  // evaluating the bound.
  const Eigen::VectorXd bt =
      restricted_fit(instance, hyper, sel, /*mu=*/0.0, &out.regularized_fallback);
  out.beta = Eigen::VectorXd::Zero(instance.p);
  for (std::size_t a = 0; a < sel.size(); ++a)
    out.beta[sel[a]] = bt[static_cast<int>(a)];
  out.nu_ub = objective(out.beta, instance, hyper);
  out.support = support_of(out.beta);
  return out;
}

double gap_percent(double nu_lb, double nu_ub) {
  if (!(nu_lb > 0))
    throw std::domain_error("gap is undefined for nu_lb <= 0; report the "
                            "absolute difference instead");
  return (nu_ub - nu_lb) / nu_lb * 100.0;
}

BruteForceResult brute_force_opt(const RegressionInstance& instance,
                                 const HyperParams& hyper, Exec mode) {
  hyper.validate(instance.p);
  const int p = instance.p;
  const int k = hyper.k;

  double count = 1.0, binom = 1.0; // supports of size 0..k
  for (int t = 1; t <= k; ++t) {
    binom *= static_cast<double>(p - t + 1) / t;
    count += binom;
  }
  if (count > 1e6)
    throw std::runtime_error("brute_force_opt: " + std::to_string(count) +
                             " supports exceed the 1e6 guard");

  std::vector<std::vector<int>> supports = enumerate_subsets(p, 1, k);
  supports.insert(supports.begin(), {}); // empty support = zero estimator

  const int nsup = static_cast<int>(supports.size());
  std::vector<double> values(static_cast<std::size_t>(nsup));
  std::vector<Eigen::VectorXd> betas(static_cast<std::size_t>(nsup));

  auto eval_one = [&](int s) {
    const auto& sup = supports[static_cast<std::size_t>(s)];
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (!sup.empty()) {
      const Eigen::VectorXd bt = restricted_fit(instance, hyper, sup, hyper.mu, nullptr);
      for (std::size_t a = 0; a < sup.size(); ++a) beta[sup[a]] = bt[static_cast<int>(a)];
    }
    values[static_cast<std::size_t>(s)] = objective(beta, instance, hyper);
    betas[static_cast<std::size_t>(s)] = std::move(beta);
  };

  if (mode == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_budget())
    for (int s = 0; s < nsup; ++s) eval_one(s);
  } else {
    for (int s = 0; s < nsup; ++s) eval_one(s);
  }

  int best = 0;
  for (int s = 1; s < nsup; ++s)
    if (values[static_cast<std::size_t>(s)] < values[static_cast<std::size_t>(best)])
      best = s; // strict `<`: ties keep the earliest support in colex order

  BruteForceResult out;
  out.beta = betas[static_cast<std::size_t>(best)];
  out.nu = values[static_cast<std::size_t>(best)];
  out.support = support_of(out.beta);
  return out;
}

std::vector<int> support_of(const Eigen::VectorXd& beta, double threshold) {
  std::vector<int> s;
  for (int i = 0; i < beta.size(); ++i)
    if (std::abs(beta[i]) > threshold) s.push_back(i);
  return s;
}

BoundCertificate make_certificate(double nu_lb, const RoundedEstimate& rounded,
                                  const RelaxationSpec& spec, double seconds) {
  BoundCertificate cert;
  cert.nu_lb = nu_lb;
  cert.nu_ub = rounded.nu_ub;
  cert.beta_rounded = rounded.beta;
  cert.support = rounded.support;
  cert.relaxation = spec;
  cert.solve_seconds = seconds;
  if (nu_lb > 0) {
    cert.gap_percent = gap_percent(nu_lb, rounded.nu_ub);
    cert.gap_defined = true;
  } else {
    cert.gap_percent = rounded.nu_ub - nu_lb; // absolute difference fallback
    cert.gap_defined = false;
  }
  return cert;
}

std::string BoundCertificate::to_json(bool include_timing) const {
  nlohmann::json j;
  j["schema"] = "rank1-sparse/1";
  j["relaxation"] = relaxation_kind_name(relaxation);
  j["lambda"] = relaxation.hyper.lambda;
  j["mu"] = relaxation.hyper.mu;
  j["k"] = relaxation.hyper.k;
  j["nu_lb"] = nu_lb;
  j["nu_ub"] = nu_ub;
  j["gap_percent"] = gap_percent;
  j["gap_defined"] = gap_defined;
  j["support"] = support;
  j["nonzeros"] = static_cast<int>(support.size());
  if (include_timing) j["solve_seconds"] = solve_seconds;
  std::vector<double> b(beta_rounded.data(), beta_rounded.data() + beta_rounded.size());
  j["beta"] = b;
  return j.dump(2);
}

} // namespace rank1
