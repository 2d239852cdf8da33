#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rank1/relaxations.hpp"

namespace rank1 {

enum class PsdMode { FullPsd, EigenCuts };

// Per-pair sets of alpha multipliers for the two conic-quadratic cut
// families. Members stay strictly positive and finite; insertion
// deduplicates within a relative 1e-9.
struct CutPool {
  int p = 0;
  std::vector<std::vector<double>> v_plus;  // indexed by pair_index(i, j)
  std::vector<std::vector<double>> v_minus;
  double violation_tol = 1e-6;
  int round_limit = 50;

  static CutPool empty(int p);
  static CutPool sdd_start(int p); // V+ = V- = {1} for every pair

  int pair_index(int i, int j) const;
  bool add_plus(int i, int j, double alpha);
  bool add_minus(int i, int j, double alpha);
  int total_cuts() const;
};

/// Outer approximation of the pair-strengthened relaxation: one rotated cone
/// row per (pair, alpha), singleton perspective rows and w bounds always
/// present. FullPsd keeps the (p+1)-order block; EigenCuts swaps it for the
/// eigenvector-direction quadratic rows.
BuiltRelaxation build_cut_relaxation(const RegressionInstance& instance,
                                     const HyperParams& hyper, const CutPool& pool,
                                     PsdMode psd_mode);

struct Separation {
  std::optional<double> alpha_plus;  // absent when a denominator vanishes
  std::optional<double> alpha_minus;
  double violation_plus = 0.0;
  double violation_minus = 0.0;
  bool degenerate = false; // w_ij <= 0: pair skipped
};

/// Most-violated multipliers for pair (i, j) at the current relaxed point.
/// Violations use the product-form residuals; alpha is the closed-form
/// optimizer sqrt(den_j / den_i) when both denominators are positive.
Separation separate_alpha(const RelaxedSolution& sol, int i, int j);

struct CutRound {
  int round = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  int cuts_added = 0;
};

struct CutTrace {
  std::vector<CutRound> rounds;
  bool solver_warning = false;
  std::string warning;

  std::string to_json() const;
};

struct CutLoopResult {
  RelaxedSolution solution;
  CutPool pool;
  CutTrace trace;
};

/// Iterate build -> solve -> separate, adding at most one plus and one minus
/// cut per pair per round, until the largest pairwise violation drops to
/// tol_violation or the round budget runs out. A solver failure mid-loop
/// returns the last valid iterate with a warning in the trace.
CutLoopResult cut_loop(const RegressionInstance& instance, const HyperParams& hyper,
                       const CutPool& pool0, PsdMode psd_mode, double tol_violation,
                       int max_rounds, const SolveOptions& opts = {});

} // namespace rank1
