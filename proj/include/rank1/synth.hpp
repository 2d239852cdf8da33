#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rank1/bounds.hpp"
#include "rank1/instance.hpp"

namespace rank1 {

// Philox-4x32-10 counter-based generator: reproducible across platforms and
// independent of call interleaving given the same draw order.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);
  std::uint32_t next_u32();
  double uniform();  // [0, 1) with 53 random bits
  double gaussian(); // Marsaglia polar method

 private:
  void refill();
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> buffer_;
  int buffer_pos_ = 4;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

struct SyntheticSpec {
  int n = 100;
  int p = 20;
  int s = 5;        // true support size; beta0 = (1,...,1,0,...,0)
  double rho = 0.0; // predictor autocorrelation, Sigma_ij = rho^|i-j|
  double snr = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  RegressionInstance instance;
  Eigen::VectorXd beta0;
  double sigma2 = 0.0;
  Eigen::MatrixXd sigma; // population covariance
};

/// Rows of X are N(0, Sigma), y = X beta0 + eps with eps ~ N(0, sigma2 I)
/// and sigma2 = beta0' Sigma beta0 / SNR. Bit-reproducible for a fixed seed.
SyntheticData generate(const SyntheticSpec& spec);

struct MetricReport {
  double rr = 0.0;  // relative risk, perfect 0 / null 1
  double rte = 0.0; // relative test error, perfect 1 / null SNR+1
  double pve = 0.0; // proportion of variance explained, perfect SNR/(1+SNR)
  int nonzeros = 0;
  int correct_nonzeros = 0;

  std::string to_json() const;
};

MetricReport metrics(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0,
                     const Eigen::MatrixXd& sigma, double sigma2);

/// min ||y - X b||^2 + lambda (alpha ||b||_1 + (1 - alpha) ||b||^2) by
/// accelerated proximal gradient, run to duality gap <= 1e-8 (or the
/// iteration/relative-change fallbacks). Deterministic.
Eigen::VectorXd elastic_net(const RegressionInstance& instance, double alpha,
                            double lambda_reg);

struct EnGridPoint {
  double alpha = 0.0;
  double lambda = 0.0;
  double val_error = 0.0;
  Eigen::VectorXd beta;
};

struct EnSelection {
  Eigen::VectorXd beta;
  double alpha = 0.0;
  double lambda = 0.0;
  double val_error = 0.0;
  int grid_index = 0;
  std::vector<EnGridPoint> grid; // every fitted point, for JSON-lines export
};

/// 11 alpha values x 50 lambdas log-spaced from ||X'y||_inf down by 200x;
/// returns the fit with the lowest validation prediction error (first grid
/// index wins ties).
EnSelection en_grid(const RegressionInstance& train, const RegressionInstance& val);

struct Sdp2GridPoint {
  int k = 0;
  double val_error = 0.0;
  double nu_lb = 0.0;
  double nu_ub = 0.0;
  double seconds = 0.0;
  Eigen::VectorXd beta;
};

struct Sdp2Selection {
  int k = 0; // chosen sparsity (0 = null model)
  Eigen::VectorXd beta;
  double val_error = 0.0;
  std::optional<BoundCertificate> certificate; // absent for k = 0
  std::vector<int> skipped_k;                  // solver failures, if any
  std::vector<Sdp2GridPoint> grid;
};

/// Solve the pair-strengthened SDP relaxation (lambda = mu = 0) for
/// k = 0..k_max, round each, and keep the k with the lowest validation error.
Sdp2Selection sdp2_grid(const RegressionInstance& train, const RegressionInstance& val,
                        int k_max = 7, double tol = 1e-6);

} // namespace rank1
