#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rank1/instance.hpp"
#include "rank1/solver.hpp"

namespace rank1 {

enum class RelaxationKind { Persp, SdpR, SdpLb, SdpDd, Cuts };

struct RelaxationSpec {
  RelaxationKind kind = RelaxationKind::SdpR;
  int r = 1; // only meaningful for SdpR
  HyperParams hyper;
};

std::string relaxation_kind_name(const RelaxationSpec& spec);

// Index bookkeeping for pulling structured variables out of a ConeSolution.
struct VariableMap {
  std::vector<int> beta;
  std::vector<int> z;
  std::vector<int> u;                      // empty when mu == 0
  Eigen::MatrixXi b_entry;                 // -1 when the formulation has no B
  std::vector<std::vector<int>> w_subsets; // colex order within each size
  std::vector<int> w_var;

  int pair_w(int i, int j) const; // -1 if that pair has no w variable
};

struct BuiltRelaxation {
  ConeProgram program;
  VariableMap vars;
  double objective_offset = 0.0; // y'y, added back at extraction
  int p = 0;
};

struct RelaxedSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd z;
  Eigen::VectorXd u;      // empty when mu == 0
  Eigen::MatrixXd b_mat;  // zero-sized when the formulation has no B
  std::map<std::vector<int>, double> w;
  double nu_lb = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  Residuals residuals;

  double pair_w(int i, int j) const;
};

// Continuous relaxation of the cardinality-constrained least squares problem
// with the Tikhonov part lifted through perspective terms. Requires lambda>0.
BuiltRelaxation build_persp(const RegressionInstance& instance,
                            const HyperParams& hyper);

// Semidefinite relaxation strengthened over every subset of size <= r:
// one w_T variable and one (|T|+1)-order PSD block per subset with
// 2 <= |T| <= r, order-2 blocks for singletons, and the full (p+1)-order
// block. r >= 3 grows as C(p,r) and must be enabled explicitly.
BuiltRelaxation build_sdp_r(const RegressionInstance& instance,
                            const HyperParams& hyper, int r,
                            bool allow_large = false);

// build_sdp_r(r=2) with the (p+1)-order block replaced by min(p,n)
// eigenvector-direction quadratic rows V_j' (B - beta beta') V_j >= 0.
BuiltRelaxation build_sdp_lb(const RegressionInstance& instance,
                             const HyperParams& hyper);

// Relaxation from diagonally-dominant-plus-PSD decompositions: pairwise
// (beta_i +- beta_j)^2 / w_ij rows, singleton perspective rows, and the full
// PSD block.
BuiltRelaxation build_sdp_dd(const RegressionInstance& instance,
                             const HyperParams& hyper);

/// Recover named variables from a solver result. Accepts optimal solves, or
/// max_iters solves whose residuals are all within 10x the given tolerance;
/// infeasible/unbounded certificates are reported as errors.
RelaxedSolution extract(const ConeSolution& solution, const BuiltRelaxation& built,
                        double tol = 1e-6);

/// Convenience: build per `spec`, solve, extract.
RelaxedSolution solve_relaxation(const RegressionInstance& instance,
                                 const RelaxationSpec& spec,
                                 const SolveOptions& opts = {});

/// Value of the optimal rank-one decomposition bound at a fixed point (z,
/// beta): minimize <Q, B> subject to the subset blocks with w_T pinned at
/// min(1, z(T)) and B - beta beta' psd. Returns +inf when some beta_i != 0
/// has z(T) = 0 for every admissible T (the division-by-zero convention).
double decomposition_value(const Eigen::MatrixXd& q, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& beta, int r, double tol = 1e-7,
                           int max_iters = 200000);

// Subsets of {0..p-1} with size in [min_size, max_size], sizes ascending,
// colexicographic order within each size.
std::vector<std::vector<int>> enumerate_subsets(int p, int min_size, int max_size);

} // namespace rank1
