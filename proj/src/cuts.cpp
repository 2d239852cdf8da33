#include "rank1/cuts.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "rank1/linalg.hpp"

namespace rank1 {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kDenominatorFloor = 1e-10;
} // namespace

CutPool CutPool::empty(int p) {
  CutPool pool;
  pool.p = p;
  const std::size_t pairs = static_cast<std::size_t>(p) * (p - 1) / 2;
  pool.v_plus.resize(pairs);
  pool.v_minus.resize(pairs);
  return pool;
}

CutPool CutPool::sdd_start(int p) {
  CutPool pool = empty(p);
  for (auto& v : pool.v_plus) v.push_back(1.0);
  for (auto& v : pool.v_minus) v.push_back(1.0);
  return pool;
}

int CutPool::pair_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= p || i == j) throw std::out_of_range("bad pair");
  // colex order over pairs: (0,1), (0,2), (1,2), (0,3), ...
  return j * (j - 1) / 2 + i;
}

namespace {
bool add_dedup(std::vector<double>& set, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw std::invalid_argument("cut multipliers must be positive and finite");
  for (double a : set)
    if (std::abs(a - alpha) <= 1e-9 * std::max(std::abs(a), std::abs(alpha)))
      return false;
  set.push_back(alpha);
  return true;
}
} // namespace

bool CutPool::add_plus(int i, int j, double alpha) {
  return add_dedup(v_plus[static_cast<std::size_t>(pair_index(i, j))], alpha);
}

bool CutPool::add_minus(int i, int j, double alpha) {
  return add_dedup(v_minus[static_cast<std::size_t>(pair_index(i, j))], alpha);
}

int CutPool::total_cuts() const {
  std::size_t n = 0;
  for (const auto& v : v_plus) n += v.size();
  for (const auto& v : v_minus) n += v.size();
  return static_cast<int>(n);
}

BuiltRelaxation build_cut_relaxation(const RegressionInstance& instance,
                                     const HyperParams& hyper, const CutPool& pool,
                                     PsdMode psd_mode) {
  hyper.validate(instance.p);
  const int p = instance.p;
  if (pool.p != p) throw std::invalid_argument("cut pool built for a different p");

  ProgramBuilder pb;
  const Eigen::VectorXd xty = instance.x.transpose() * instance.y;
  std::vector<int> beta, z, u;
  for (int i = 0; i < p; ++i)
    beta.push_back(pb.add_var("beta[" + std::to_string(i) + "]", -2.0 * xty[i]));
  for (int i = 0; i < p; ++i) z.push_back(pb.add_var("z[" + std::to_string(i) + "]"));
  if (hyper.mu > 0)
    for (int i = 0; i < p; ++i)
      u.push_back(pb.add_var("u[" + std::to_string(i) + "]", hyper.mu));
  const Eigen::MatrixXd q = gram(instance, hyper.lambda);
  Eigen::MatrixXi b_entry(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double coeff = i == j ? q(i, i) : 2.0 * q(i, j);
      const int var =
          pb.add_var("B[" + std::to_string(i) + "," + std::to_string(j) + "]", coeff);
      b_entry(i, j) = var;
      b_entry(j, i) = var;
    }

  LinExpr card(static_cast<double>(hyper.k));
  for (int i = 0; i < p; ++i) card -= LinExpr::var(z[static_cast<std::size_t>(i)]);
  pb.add_nonneg(card);
  for (int i = 0; i < p; ++i) {
    pb.add_nonneg(LinExpr::var(z[static_cast<std::size_t>(i)]));
    pb.add_nonneg(1.0 - LinExpr::var(z[static_cast<std::size_t>(i)]));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    pb.add_nonneg(LinExpr::var(u[i]) - LinExpr::var(beta[i]));
    pb.add_nonneg(LinExpr::var(u[i]) + LinExpr::var(beta[i]));
  }

  for (int i = 0; i < p; ++i)
    pb.add_rsoc({LinExpr::var(z[static_cast<std::size_t>(i)]),
                 LinExpr::var(b_entry(i, i)),
                 kSqrt2 * LinExpr::var(beta[static_cast<std::size_t>(i)])});

  BuiltRelaxation built;
  built.vars.w_subsets = enumerate_subsets(p, 2, 2);
  for (const auto& t : built.vars.w_subsets)
    built.vars.w_var.push_back(
        pb.add_var("w[" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "]"));

  for (std::size_t h = 0; h < built.vars.w_subsets.size(); ++h) {
    const int i = built.vars.w_subsets[h][0];
    const int j = built.vars.w_subsets[h][1];
    const int wv = built.vars.w_var[h];
    pb.add_nonneg(LinExpr::var(wv));
    pb.add_nonneg(1.0 - LinExpr::var(wv));
    pb.add_nonneg(LinExpr::var(z[static_cast<std::size_t>(i)]) +
                  LinExpr::var(z[static_cast<std::size_t>(j)]) - LinExpr::var(wv));

    const LinExpr bi = LinExpr::var(beta[static_cast<std::size_t>(i)]);
    const LinExpr bj = LinExpr::var(beta[static_cast<std::size_t>(j)]);
    const int pair = pool.pair_index(i, j);
    for (double alpha : pool.v_plus[static_cast<std::size_t>(pair)]) {
      const double ra = std::sqrt(alpha);
      pb.add_rsoc({0.5 * (alpha * LinExpr::var(b_entry(i, i)) +
                          2.0 * LinExpr::var(b_entry(i, j)) +
                          (1.0 / alpha) * LinExpr::var(b_entry(j, j))),
                   LinExpr::var(wv), ra * bi + (1.0 / ra) * bj});
    }
    for (double alpha : pool.v_minus[static_cast<std::size_t>(pair)]) {
      const double ra = std::sqrt(alpha);
      pb.add_rsoc({0.5 * (alpha * LinExpr::var(b_entry(i, i)) -
                          2.0 * LinExpr::var(b_entry(i, j)) +
                          (1.0 / alpha) * LinExpr::var(b_entry(j, j))),
                   LinExpr::var(wv), ra * bi - (1.0 / ra) * bj});
    }
  }

  if (psd_mode == PsdMode::FullPsd) {
    std::vector<LinExpr> upper;
    upper.push_back(LinExpr(1.0));
    for (int j = 0; j < p; ++j) upper.push_back(LinExpr::var(beta[static_cast<std::size_t>(j)]));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) upper.push_back(LinExpr::var(b_entry(i, j)));
    pb.add_psd(upper, p + 1);
  } else {
    const auto eig = linalg::eigendecompose(instance.x.transpose() * instance.x);
    const int ncuts = std::min(p, instance.n);
    for (int c = 0; c < ncuts; ++c) {
      const Eigen::VectorXd vj = eig.vectors.col(c);
      LinExpr vbv, vbeta;
      for (int a = 0; a < p; ++a) {
        vbeta += vj[a] * LinExpr::var(beta[static_cast<std::size_t>(a)]);
        for (int d = a; d < p; ++d) {
          const double coeff = a == d ? vj[a] * vj[a] : 2.0 * vj[a] * vj[d];
          if (coeff != 0.0) vbv += coeff * LinExpr::var(b_entry(a, d));
        }
      }
      pb.add_rsoc({vbv, LinExpr(0.5), vbeta});
    }
  }

  built.program = pb.take();
  built.vars.beta = beta;
  built.vars.z = z;
  built.vars.u = u;
  built.vars.b_entry = b_entry;
  built.objective_offset = instance.y.squaredNorm();
  built.p = p;
  return built;
}

Separation separate_alpha(const RelaxedSolution& sol, int i, int j) {
  Separation sep;
  const double w = sol.pair_w(i, j);
  if (w <= 0.0) {
    sep.degenerate = true;
    return sep;
  }
  const double bi = sol.beta[i];
  const double bj = sol.beta[j];
  const double den_i = sol.b_mat(i, i) * w - bi * bi;
  const double den_j = sol.b_mat(j, j) * w - bj * bj;
  const double root = std::sqrt(std::max(den_i, 0.0) * std::max(den_j, 0.0));
  sep.violation_plus = bi * bj - sol.b_mat(i, j) * w - root;
  sep.violation_minus = -bi * bj + sol.b_mat(i, j) * w - root;
  if (den_i > kDenominatorFloor && den_j > kDenominatorFloor) {
    const double alpha = std::sqrt(den_j / den_i);
    sep.alpha_plus = alpha;
    sep.alpha_minus = alpha;
  }
  return sep;
}

namespace {
// A vanished denominator means the most violated member of the family sits at
// the alpha -> 0 or alpha -> infinity limit; pick a finite alpha that
// captures at least half of the limiting violation.
double limit_alpha(const RelaxedSolution& sol, int i, int j, double w,
                   double violation) {
  const double den_i = sol.b_mat(i, i) * w - sol.beta[i] * sol.beta[i];
  const double den_j = sol.b_mat(j, j) * w - sol.beta[j] * sol.beta[j];
  const bool i_vanished = den_i <= kDenominatorFloor;
  const bool j_vanished = den_j <= kDenominatorFloor;
  const double v = std::max(violation, 1e-12);
  if (i_vanished && j_vanished) return 1.0;
  if (i_vanished) return std::min(1e8, std::max(1.0, den_j / v));
  return std::max(1e-8, std::min(1.0, v / den_i));
}
} // namespace

std::string CutTrace::to_json() const {
  nlohmann::json j;
  j["rounds"] = nlohmann::json::array();
  for (const auto& r : rounds)
    j["rounds"].push_back({{"round", r.round},
                           {"objective", r.objective},
                           {"max_violation", r.max_violation},
                           {"cuts_added", r.cuts_added}});
  j["solver_warning"] = solver_warning;
  if (solver_warning) j["warning"] = warning;
  return j.dump(2);
}

CutLoopResult cut_loop(const RegressionInstance& instance, const HyperParams& hyper,
                       const CutPool& pool0, PsdMode psd_mode, double tol_violation,
                       int max_rounds, const SolveOptions& opts) {
  if (max_rounds < 1) throw std::invalid_argument("cut_loop needs max_rounds >= 1");
  CutLoopResult res;
  res.pool = pool0;
  bool have_solution = false;

  for (int round = 1; round <= max_rounds; ++round) {
    RelaxedSolution rel;
    try {
      const BuiltRelaxation built =
          build_cut_relaxation(instance, hyper, res.pool, psd_mode);
      rel = extract(solve(built.program, opts), built, opts.tol);
    } catch (const std::exception& e) {
      if (!have_solution) throw;
      res.trace.solver_warning = true;
      res.trace.warning = e.what();
      return res;
    }
    res.solution = rel;
    have_solution = true;

    const int p = instance.p;
    const int npairs = p * (p - 1) / 2;
    std::vector<Separation> seps(static_cast<std::size_t>(npairs));
#pragma omp parallel for schedule(static) num_threads(thread_budget())
    for (int h = 0; h < npairs; ++h) {
      // invert the colex pair index
      int j = 1;
      while ((j + 1) * j / 2 <= h) ++j;
      const int i = h - j * (j - 1) / 2;
      seps[static_cast<std::size_t>(h)] = separate_alpha(rel, i, j);
    }

    double max_violation = 0.0;
    for (const auto& s : seps) {
      if (s.degenerate) continue;
      max_violation = std::max({max_violation, s.violation_plus, s.violation_minus});
    }
    res.trace.rounds.push_back({round, rel.nu_lb, max_violation, 0});

    if (max_violation <= tol_violation || round == max_rounds) break;

    int added = 0;
    for (int h = 0; h < npairs; ++h) {
      int j = 1;
      while ((j + 1) * j / 2 <= h) ++j;
      const int i = h - j * (j - 1) / 2;
      const Separation& s = seps[static_cast<std::size_t>(h)];
      if (s.degenerate) continue;
      const double w = rel.pair_w(i, j);
      if (s.violation_plus > tol_violation) {
        const double alpha =
            s.alpha_plus ? *s.alpha_plus : limit_alpha(rel, i, j, w, s.violation_plus);
        if (res.pool.add_plus(i, j, alpha)) ++added;
      }
      if (s.violation_minus > tol_violation) {
        const double alpha = s.alpha_minus ? *s.alpha_minus
                                           : limit_alpha(rel, i, j, w, s.violation_minus);
        if (res.pool.add_minus(i, j, alpha)) ++added;
      }
    }
    res.trace.rounds.back().cuts_added = added;
    if (added == 0) break; // every violated cut was a duplicate
  }
  return res;
}

} // namespace rank1
