#include "rank1/relaxations.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rank1/linalg.hpp"

namespace rank1 {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

struct CoreVars {
  std::vector<int> beta, z, u;
};

// Variables and rows shared by every relaxation: beta with its linear
// objective part, z with box and cardinality rows, and (when mu > 0) the
// absolute-value epigraph u.
CoreVars add_core(ProgramBuilder& pb, const RegressionInstance& instance,
                  const HyperParams& hyper) {
  const int p = instance.p;
  const Eigen::VectorXd xty = instance.x.transpose() * instance.y;
  CoreVars v;
  for (int i = 0; i < p; ++i)
    v.beta.push_back(pb.add_var("beta[" + std::to_string(i) + "]", -2.0 * xty[i]));
  for (int i = 0; i < p; ++i)
    v.z.push_back(pb.add_var("z[" + std::to_string(i) + "]"));
  if (hyper.mu > 0)
    for (int i = 0; i < p; ++i)
      v.u.push_back(pb.add_var("u[" + std::to_string(i) + "]", hyper.mu));

  LinExpr card(static_cast<double>(hyper.k));
  for (int i = 0; i < p; ++i) card -= LinExpr::var(v.z[static_cast<std::size_t>(i)]);
  pb.add_nonneg(card);
  for (int i = 0; i < p; ++i) {
    pb.add_nonneg(LinExpr::var(v.z[static_cast<std::size_t>(i)]));
    pb.add_nonneg(1.0 - LinExpr::var(v.z[static_cast<std::size_t>(i)]));
  }
  for (std::size_t i = 0; i < v.u.size(); ++i) {
    pb.add_nonneg(LinExpr::var(v.u[i]) - LinExpr::var(v.beta[i]));
    pb.add_nonneg(LinExpr::var(v.u[i]) + LinExpr::var(v.beta[i]));
  }
  return v;
}

// Upper-triangle B variables carrying <Q, B> in the objective.
Eigen::MatrixXi add_b_vars(ProgramBuilder& pb, const Eigen::MatrixXd& q) {
  const int p = static_cast<int>(q.rows());
  Eigen::MatrixXi idx(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double coeff = i == j ? q(i, i) : 2.0 * q(i, j);
      const int var = pb.add_var(
          "B[" + std::to_string(i) + "," + std::to_string(j) + "]", coeff);
      idx(i, j) = var;
      idx(j, i) = var;
    }
  return idx;
}

// PSD block [[w, beta_T'], [beta_T, B_T]] of order |T|+1. `w` may be a
// variable expression or a constant.
void add_subset_block(ProgramBuilder& pb, const LinExpr& w,
                      const std::vector<LinExpr>& beta_t,
                      const std::vector<std::vector<LinExpr>>& b_t) {
  const int t = static_cast<int>(beta_t.size());
  std::vector<LinExpr> upper;
  upper.reserve(static_cast<std::size_t>((t + 1) * (t + 2) / 2));
  upper.push_back(w);
  for (int j = 0; j < t; ++j) upper.push_back(beta_t[static_cast<std::size_t>(j)]);
  for (int i = 0; i < t; ++i)
    for (int j = i; j < t; ++j)
      upper.push_back(b_t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  pb.add_psd(upper, t + 1);
}

void add_full_block(ProgramBuilder& pb, const std::vector<int>& beta,
                    const Eigen::MatrixXi& b_entry) {
  const int p = static_cast<int>(beta.size());
  std::vector<LinExpr> beta_e;
  std::vector<std::vector<LinExpr>> b_e(static_cast<std::size_t>(p),
                                        std::vector<LinExpr>(static_cast<std::size_t>(p)));
  for (int i = 0; i < p; ++i) {
    beta_e.push_back(LinExpr::var(beta[static_cast<std::size_t>(i)]));
    for (int j = 0; j < p; ++j)
      b_e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          LinExpr::var(b_entry(i, j));
  }
  add_subset_block(pb, LinExpr(1.0), beta_e, b_e);
}

double count_subset_blocks(int p, int r) {
  double total = 0.0, binom = static_cast<double>(p) * (p - 1) / 2.0;
  for (int t = 2; t <= r; ++t) {
    total += binom;
    binom *= static_cast<double>(p - t) / (t + 1);
  }
  return total;
}

} // namespace

std::string relaxation_kind_name(const RelaxationSpec& spec) {
  switch (spec.kind) {
    case RelaxationKind::Persp: return "persp";
    case RelaxationKind::SdpR: return "sdp" + std::to_string(spec.r);
    case RelaxationKind::SdpLb: return "sdplb";
    case RelaxationKind::SdpDd: return "sdpdd";
    case RelaxationKind::Cuts: return "cuts";
  }
  return "?";
}

int VariableMap::pair_w(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (std::size_t h = 0; h < w_subsets.size(); ++h) {
    const auto& t = w_subsets[h];
    if (t.size() == 2 && t[0] == i && t[1] == j) return w_var[h];
  }
  return -1;
}

double RelaxedSolution::pair_w(int i, int j) const {
  if (i > j) std::swap(i, j);
  const auto it = w.find({i, j});
  if (it == w.end()) throw std::out_of_range("no w variable for that pair");
  return it->second;
}

std::vector<std::vector<int>> enumerate_subsets(int p, int min_size, int max_size) {
  std::vector<std::vector<int>> out;
  for (int t = min_size; t <= std::min(max_size, p); ++t) {
    if (t <= 0) continue;
    std::vector<int> c(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) c[static_cast<std::size_t>(i)] = i;
    while (true) {
      out.push_back(c);
      // colex successor: bump the first element that has room, reset below
      int i = 0;
      while (i < t) {
        const int cap = (i + 1 < t) ? c[static_cast<std::size_t>(i) + 1] : p;
        if (c[static_cast<std::size_t>(i)] + 1 < cap) break;
        ++i;
      }
      if (i == t) break;
      ++c[static_cast<std::size_t>(i)];
      for (int l = 0; l < i; ++l) c[static_cast<std::size_t>(l)] = l;
    }
  }
  return out;
}

BuiltRelaxation build_persp(const RegressionInstance& instance,
                            const HyperParams& hyper) {
  hyper.validate(instance.p);
  if (!(hyper.lambda > 0))
    throw std::invalid_argument(
        "the perspective relaxation may only be used if lambda > 0");
  const int p = instance.p;
  ProgramBuilder pb;
  CoreVars core = add_core(pb, instance, hyper);

  const int t0 = pb.add_var("t_quad", 1.0);
  std::vector<int> ti(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    ti[static_cast<std::size_t>(i)] = pb.add_var("t_persp[" + std::to_string(i) + "]", 1.0);

  // t0 >= beta' X'X beta via the rotated cone (t0, 1/2, S beta), S = (X'X)^1/2
  const Eigen::MatrixXd s = linalg::sqrt_psd(instance.x.transpose() * instance.x);
  std::vector<LinExpr> rows{LinExpr::var(t0), LinExpr(0.5)};
  for (int i = 0; i < p; ++i) {
    LinExpr e;
    for (int j = 0; j < p; ++j)
      if (s(i, j) != 0.0) e += s(i, j) * LinExpr::var(core.beta[static_cast<std::size_t>(j)]);
    rows.push_back(e);
  }
  pb.add_rsoc(rows);

  // t_i z_i >= lambda beta_i^2
  const double root = std::sqrt(2.0 * hyper.lambda);
  for (int i = 0; i < p; ++i)
    pb.add_rsoc({LinExpr::var(ti[static_cast<std::size_t>(i)]),
                 LinExpr::var(core.z[static_cast<std::size_t>(i)]),
                 root * LinExpr::var(core.beta[static_cast<std::size_t>(i)])});

  BuiltRelaxation built;
  built.program = pb.take();
  built.vars.beta = core.beta;
  built.vars.z = core.z;
  built.vars.u = core.u;
  built.vars.b_entry.resize(0, 0);
  built.objective_offset = instance.y.squaredNorm();
  built.p = p;
  return built;
}

BuiltRelaxation build_sdp_r(const RegressionInstance& instance,
                            const HyperParams& hyper, int r, bool allow_large) {
  hyper.validate(instance.p);
  const int p = instance.p;
  if (r < 1 || r > p) throw std::invalid_argument("sdp_r needs 1 <= r <= p");
  if (r >= 3 && !allow_large) {
    const double blocks = count_subset_blocks(p, r);
    throw std::invalid_argument(
        "sdp_" + std::to_string(r) + " creates about " + std::to_string(blocks) +
        " subset blocks; pass allow_large to build it anyway");
  }

  ProgramBuilder pb;
  CoreVars core = add_core(pb, instance, hyper);
  const Eigen::MatrixXd q = gram(instance, hyper.lambda);
  const Eigen::MatrixXi b_entry = add_b_vars(pb, q);

  BuiltRelaxation built;
  built.vars.w_subsets = enumerate_subsets(p, 2, r);
  for (const auto& t : built.vars.w_subsets) {
    std::string name = "w[";
    for (std::size_t l = 0; l < t.size(); ++l)
      name += (l ? "," : "") + std::to_string(t[l]);
    built.vars.w_var.push_back(pb.add_var(name + "]"));
  }

  // singletons: [[z_i, beta_i], [beta_i, B_ii]] psd
  for (int i = 0; i < p; ++i)
    pb.add_psd({LinExpr::var(core.z[static_cast<std::size_t>(i)]),
                LinExpr::var(core.beta[static_cast<std::size_t>(i)]),
                LinExpr::var(b_entry(i, i))},
               2);

  for (std::size_t h = 0; h < built.vars.w_subsets.size(); ++h) {
    const auto& t = built.vars.w_subsets[h];
    const int wv = built.vars.w_var[h];
    pb.add_nonneg(1.0 - LinExpr::var(wv));
    LinExpr zsum;
    for (int i : t) zsum += LinExpr::var(core.z[static_cast<std::size_t>(i)]);
    pb.add_nonneg(zsum - LinExpr::var(wv));

    std::vector<LinExpr> beta_t;
    std::vector<std::vector<LinExpr>> b_t(t.size(), std::vector<LinExpr>(t.size()));
    for (std::size_t a = 0; a < t.size(); ++a) {
      beta_t.push_back(LinExpr::var(core.beta[static_cast<std::size_t>(t[a])]));
      for (std::size_t c = 0; c < t.size(); ++c)
        b_t[a][c] = LinExpr::var(b_entry(t[a], t[c]));
    }
    add_subset_block(pb, LinExpr::var(wv), beta_t, b_t);
  }

  add_full_block(pb, core.beta, b_entry);

  built.program = pb.take();
  built.vars.beta = core.beta;
  built.vars.z = core.z;
  built.vars.u = core.u;
  built.vars.b_entry = b_entry;
  built.objective_offset = instance.y.squaredNorm();
  built.p = p;
  return built;
}

BuiltRelaxation build_sdp_lb(const RegressionInstance& instance,
                             const HyperParams& hyper) {
  hyper.validate(instance.p);
  const int p = instance.p;
  ProgramBuilder pb;
  CoreVars core = add_core(pb, instance, hyper);
  const Eigen::MatrixXd q = gram(instance, hyper.lambda);
  const Eigen::MatrixXi b_entry = add_b_vars(pb, q);

  BuiltRelaxation built;
  built.vars.w_subsets = enumerate_subsets(p, 2, 2);
  for (const auto& t : built.vars.w_subsets)
    built.vars.w_var.push_back(
        pb.add_var("w[" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "]"));

  for (int i = 0; i < p; ++i)
    pb.add_psd({LinExpr::var(core.z[static_cast<std::size_t>(i)]),
                LinExpr::var(core.beta[static_cast<std::size_t>(i)]),
                LinExpr::var(b_entry(i, i))},
               2);

  for (std::size_t h = 0; h < built.vars.w_subsets.size(); ++h) {
    const auto& t = built.vars.w_subsets[h];
    const int wv = built.vars.w_var[h];
    pb.add_nonneg(1.0 - LinExpr::var(wv));
    pb.add_nonneg(LinExpr::var(core.z[static_cast<std::size_t>(t[0])]) +
                  LinExpr::var(core.z[static_cast<std::size_t>(t[1])]) -
                  LinExpr::var(wv));
    std::vector<LinExpr> beta_t{LinExpr::var(core.beta[static_cast<std::size_t>(t[0])]),
                                LinExpr::var(core.beta[static_cast<std::size_t>(t[1])])};
    std::vector<std::vector<LinExpr>> b_t(2, std::vector<LinExpr>(2));
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) b_t[a][c] = LinExpr::var(b_entry(t[a], t[c]));
    add_subset_block(pb, LinExpr::var(wv), beta_t, b_t);
  }

  // V_j' B V_j >= (V_j' beta)^2 for the leading min(p,n) eigenvectors of X'X
  const auto eig = linalg::eigendecompose(instance.x.transpose() * instance.x);
  const int ncuts = std::min(p, instance.n);
  for (int j = 0; j < ncuts; ++j) {
    const Eigen::VectorXd vj = eig.vectors.col(j);
    LinExpr vbv, vbeta;
    for (int a = 0; a < p; ++a) {
      vbeta += vj[a] * LinExpr::var(core.beta[static_cast<std::size_t>(a)]);
      for (int c = a; c < p; ++c) {
        const double coeff = a == c ? vj[a] * vj[a] : 2.0 * vj[a] * vj[c];
        if (coeff != 0.0) vbv += coeff * LinExpr::var(b_entry(a, c));
      }
    }
    pb.add_rsoc({vbv, LinExpr(0.5), vbeta});
  }

  built.program = pb.take();
  built.vars.beta = core.beta;
  built.vars.z = core.z;
  built.vars.u = core.u;
  built.vars.b_entry = b_entry;
  built.objective_offset = instance.y.squaredNorm();
  built.p = p;
  return built;
}

BuiltRelaxation build_sdp_dd(const RegressionInstance& instance,
                             const HyperParams& hyper) {
  hyper.validate(instance.p);
  const int p = instance.p;
  ProgramBuilder pb;
  CoreVars core = add_core(pb, instance, hyper);
  const Eigen::MatrixXd q = gram(instance, hyper.lambda);
  const Eigen::MatrixXi b_entry = add_b_vars(pb, q);

  BuiltRelaxation built;
  built.vars.w_subsets = enumerate_subsets(p, 2, 2);
  for (const auto& t : built.vars.w_subsets)
    built.vars.w_var.push_back(
        pb.add_var("w[" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "]"));

  // singleton perspective rows z_i B_ii >= beta_i^2
  for (int i = 0; i < p; ++i)
    pb.add_rsoc({LinExpr::var(core.z[static_cast<std::size_t>(i)]),
                 LinExpr::var(b_entry(i, i)),
                 kSqrt2 * LinExpr::var(core.beta[static_cast<std::size_t>(i)])});

  for (std::size_t h = 0; h < built.vars.w_subsets.size(); ++h) {
    const int i = built.vars.w_subsets[h][0];
    const int j = built.vars.w_subsets[h][1];
    const int wv = built.vars.w_var[h];
    pb.add_nonneg(LinExpr::var(wv));
    pb.add_nonneg(1.0 - LinExpr::var(wv));
    pb.add_nonneg(LinExpr::var(core.z[static_cast<std::size_t>(i)]) +
                  LinExpr::var(core.z[static_cast<std::size_t>(j)]) -
                  LinExpr::var(wv));
    const LinExpr bi = LinExpr::var(core.beta[static_cast<std::size_t>(i)]);
    const LinExpr bj = LinExpr::var(core.beta[static_cast<std::size_t>(j)]);
    const LinExpr diag = LinExpr::var(b_entry(i, i)) + LinExpr::var(b_entry(j, j));
    // (beta_i + beta_j)^2 <= w_ij (B_ii + 2 B_ij + B_jj), and the sign flip
    pb.add_rsoc({0.5 * (diag + 2.0 * LinExpr::var(b_entry(i, j))),
                 LinExpr::var(wv), bi + bj});
    pb.add_rsoc({0.5 * (diag - 2.0 * LinExpr::var(b_entry(i, j))),
                 LinExpr::var(wv), bi - bj});
  }

  add_full_block(pb, core.beta, b_entry);

  built.program = pb.take();
  built.vars.beta = core.beta;
  built.vars.z = core.z;
  built.vars.u = core.u;
  built.vars.b_entry = b_entry;
  built.objective_offset = instance.y.squaredNorm();
  built.p = p;
  return built;
}

RelaxedSolution extract(const ConeSolution& solution, const BuiltRelaxation& built,
                        double tol) {
  if (solution.status == SolveStatus::InfeasibleCertificate ||
      solution.status == SolveStatus::UnboundedCertificate)
    throw std::runtime_error("relaxation solve failed: " +
                             solve_status_name(solution.status) + " (" +
                             solution.message + ")");
  if (solution.status == SolveStatus::MaxIters) {
    const Residuals& r = solution.residuals;
    if (r.primal > 10 * tol || r.dual > 10 * tol || r.gap > 10 * tol)
      throw std::runtime_error(
          "relaxation solve hit the iteration limit with residuals above 10x tol");
  }

  const int p = built.p;
  RelaxedSolution out;
  out.status = solution.status;
  out.residuals = solution.residuals;
  out.beta.resize(p);
  out.z.resize(p);
  for (int i = 0; i < p; ++i) {
    out.beta[i] = solution.x[static_cast<std::size_t>(built.vars.beta[static_cast<std::size_t>(i)])];
    const double zi = solution.x[static_cast<std::size_t>(built.vars.z[static_cast<std::size_t>(i)])];
    out.z[i] = std::clamp(zi, 0.0, 1.0);
  }
  if (!built.vars.u.empty()) {
    out.u.resize(p);
    for (int i = 0; i < p; ++i)
      out.u[i] = solution.x[static_cast<std::size_t>(built.vars.u[static_cast<std::size_t>(i)])];
  }
  if (built.vars.b_entry.rows() == p) {
    out.b_mat.resize(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        out.b_mat(i, j) =
            solution.x[static_cast<std::size_t>(built.vars.b_entry(i, j))];
  }
  for (std::size_t h = 0; h < built.vars.w_subsets.size(); ++h)
    out.w[built.vars.w_subsets[h]] =
        solution.x[static_cast<std::size_t>(built.vars.w_var[h])];
  out.nu_lb = solution.primal_obj + built.objective_offset;
  return out;
}

RelaxedSolution solve_relaxation(const RegressionInstance& instance,
                                 const RelaxationSpec& spec,
                                 const SolveOptions& opts) {
  BuiltRelaxation built;
  switch (spec.kind) {
    case RelaxationKind::Persp:
      built = build_persp(instance, spec.hyper);
      break;
    case RelaxationKind::SdpR:
      built = build_sdp_r(instance, spec.hyper, spec.r, /*allow_large=*/true);
      break;
    case RelaxationKind::SdpLb:
      built = build_sdp_lb(instance, spec.hyper);
      break;
    case RelaxationKind::SdpDd:
      built = build_sdp_dd(instance, spec.hyper);
      break;
    case RelaxationKind::Cuts:
      throw std::invalid_argument("cut relaxations are driven through cut_loop");
  }
  return extract(solve(built.program, opts), built, opts.tol);
}

double decomposition_value(const Eigen::MatrixXd& q, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& beta, int r, double tol,
                           int max_iters) {
  const int p = static_cast<int>(q.rows());
  if (z.size() != p || beta.size() != p)
    throw std::invalid_argument("decomposition_value: dimension mismatch");

  // Division-by-zero convention: a coordinate with beta_i != 0 and z_i = 0
  // makes every decomposition containing it blow up.
  for (int i = 0; i < p; ++i)
    if (std::abs(beta[i]) > 1e-12 && z[i] <= 1e-14)
      return std::numeric_limits<double>::infinity();

  ProgramBuilder pb;
  Eigen::MatrixXi b_entry(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double coeff = i == j ? q(i, i) : 2.0 * q(i, j);
      const int var = pb.add_var("B", coeff);
      b_entry(i, j) = var;
      b_entry(j, i) = var;
    }

  for (const auto& t : enumerate_subsets(p, 1, r)) {
    double zsum = 0.0;
    for (int i : t) zsum += z[i];
    const double w = std::min(1.0, zsum);
    std::vector<LinExpr> beta_t;
    std::vector<std::vector<LinExpr>> b_t(t.size(), std::vector<LinExpr>(t.size()));
    for (std::size_t a = 0; a < t.size(); ++a) {
      beta_t.push_back(LinExpr(beta[t[a]]));
      for (std::size_t c = 0; c < t.size(); ++c)
        b_t[a][c] = LinExpr::var(b_entry(t[a], t[c]));
    }
    add_subset_block(pb, LinExpr(w), beta_t, b_t);
  }
  {
    std::vector<LinExpr> beta_e;
    std::vector<std::vector<LinExpr>> b_e(static_cast<std::size_t>(p),
                                          std::vector<LinExpr>(static_cast<std::size_t>(p)));
    for (int i = 0; i < p; ++i) {
      beta_e.push_back(LinExpr(beta[i]));
      for (int j = 0; j < p; ++j)
        b_e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            LinExpr::var(b_entry(i, j));
    }
    add_subset_block(pb, LinExpr(1.0), beta_e, b_e);
  }

  SolveOptions opts;
  opts.tol = tol;
  opts.max_iters = max_iters;
  const ConeSolution sol = solve(pb.take(), opts);
  if (sol.status == SolveStatus::InfeasibleCertificate)
    return std::numeric_limits<double>::infinity();
  if (sol.status != SolveStatus::Optimal) {
    const Residuals& res = sol.residuals;
    const bool close = sol.status == SolveStatus::MaxIters && res.primal <= 100 * tol &&
                       res.dual <= 100 * tol && res.gap <= 100 * tol;
    if (!close)
      throw std::runtime_error("decomposition_value: solver returned " +
                               solve_status_name(sol.status));
  }
  return sol.primal_obj;
}

} // namespace rank1
