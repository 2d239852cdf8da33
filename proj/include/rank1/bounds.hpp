#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rank1/instance.hpp"
#include "rank1/parallel.hpp"
#include "rank1/relaxations.hpp"

namespace rank1 {

// Entries below this magnitude count as zero when reporting supports.
inline constexpr double kNonzeroThreshold = 1e-5;

struct BoundCertificate {
  double nu_lb = 0.0;
  double nu_ub = 0.0;
  double gap_percent = 0.0;
  bool gap_defined = true; // false when nu_lb <= 0; see gap_percent docs
  std::vector<int> support;
  Eigen::VectorXd beta_rounded;
  RelaxationSpec relaxation;
  double solve_seconds = 0.0;

  std::string to_json(bool include_timing = true) const;
};

/// ||y - X beta||^2 + lambda ||beta||^2 + mu ||beta||_1
double objective(const Eigen::VectorXd& beta, const RegressionInstance& instance,
                 const HyperParams& hyper);

struct RoundedEstimate {
  Eigen::VectorXd beta;
  double nu_ub = 0.0;
  std::vector<int> support;
  bool regularized_fallback = false; // restricted system needed a jitter
};

/// Keep the k largest |beta| entries (lower index wins ties), refit the
/// restricted ridge system on that support, zero elsewhere. The reported
/// bound evaluates the full objective including the l1 term.
RoundedEstimate greedy_round(const Eigen::VectorXd& beta_relaxed,
                             const RegressionInstance& instance,
                             const HyperParams& hyper);

/// (nu_ub - nu_lb) / nu_lb * 100. Throws std::domain_error when nu_lb <= 0.
double gap_percent(double nu_lb, double nu_ub);

struct BruteForceResult {
  Eigen::VectorXd beta;
  double nu = 0.0;
  std::vector<int> support;
};

/// Exact minimizer by enumerating every support of size <= k. Restricted
/// problems solve in closed form for mu = 0 and by coordinate descent
/// otherwise. Refuses when the support count exceeds 10^6.
BruteForceResult brute_force_opt(const RegressionInstance& instance,
                                 const HyperParams& hyper,
                                 Exec mode = Exec::Parallel);

std::vector<int> support_of(const Eigen::VectorXd& beta,
                            double threshold = kNonzeroThreshold);

BoundCertificate make_certificate(double nu_lb, const RoundedEstimate& rounded,
                                  const RelaxationSpec& spec, double seconds);

} // namespace rank1
