#include "rank1/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>

namespace rank1 {

namespace {

using Eigen::VectorXd;

struct ScaledData {
  CsrMatrix a;  // equilibrated
  CsrMatrix at; // its transpose
  VectorXd b, c;
  VectorXd row_scale, col_scale; // accumulated Ruiz divisors
  double sigma_b = 1.0, sigma_c = 1.0;
};

// Ruiz row/column equilibration. Rows of one SOC/RSOC/PSD block share a
// common scale so the block stays inside the same cone.
ScaledData equilibrate(const ConeProgram& p, int iters) {
  const int m = p.num_rows();
  const int n = p.num_vars;
  std::vector<double> vals = p.a_vals;
  VectorXd row_scale = VectorXd::Ones(m);
  VectorXd col_scale = VectorXd::Ones(n);

  std::vector<int> block_of(m, 0);
  std::vector<bool> block_uniform;
  {
    int row = 0, blk = 0;
    for (const auto& cone : p.cones) {
      const bool uniform = cone.kind != ConeKind::Zero &&
                           cone.kind != ConeKind::Nonnegative;
      block_uniform.push_back(uniform);
      for (int k = 0; k < cone.slack_rows(); ++k) block_of[row++] = blk;
      ++blk;
    }
  }
  const int nblocks = static_cast<int>(block_uniform.size());

  for (int it = 0; it < iters; ++it) {
    VectorXd rmax = VectorXd::Zero(m), cmax = VectorXd::Zero(n);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const double av = std::abs(vals[k]);
      rmax[p.a_rows[k]] = std::max(rmax[p.a_rows[k]], av);
      cmax[p.a_cols[k]] = std::max(cmax[p.a_cols[k]], av);
    }
    VectorXd bmax = VectorXd::Zero(nblocks);
    for (int i = 0; i < m; ++i) bmax[block_of[i]] = std::max(bmax[block_of[i]], rmax[i]);
    VectorXd sr(m), sc(n);
    for (int i = 0; i < m; ++i) {
      const double v = block_uniform[static_cast<std::size_t>(block_of[i])]
                           ? bmax[block_of[i]]
                           : rmax[i];
      sr[i] = v > 0 ? std::sqrt(v) : 1.0;
    }
    for (int j = 0; j < n; ++j) sc[j] = cmax[j] > 0 ? std::sqrt(cmax[j]) : 1.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
      vals[k] /= sr[p.a_rows[k]] * sc[p.a_cols[k]];
    row_scale.array() *= sr.array();
    col_scale.array() *= sc.array();
  }

  ScaledData d;
  d.a = CsrMatrix::from_triplets(m, n, p.a_rows, p.a_cols, vals);
  d.at = d.a.transposed();
  d.row_scale = row_scale;
  d.col_scale = col_scale;
  d.b.resize(m);
  for (int i = 0; i < m; ++i) d.b[i] = p.b[static_cast<std::size_t>(i)] / row_scale[i];
  d.c.resize(n);
  for (int j = 0; j < n; ++j) d.c[j] = p.c[static_cast<std::size_t>(j)] / col_scale[j];
  d.sigma_b = std::max(d.b.norm(), 1e-9);
  d.sigma_c = std::max(d.c.norm(), 1e-9);
  d.b /= d.sigma_b;
  d.c /= d.sigma_c;
  return d;
}

struct LinearSystem {
  const ScaledData* data;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  VectorXd p_vec; // M^{-1} h with h = (c, b)
  double denom = 1.0;
  Exec exec;

  void factor(const ScaledData& d, Exec mode) {
    data = &d;
    exec = mode;
    const int n = d.a.cols;
    Eigen::SparseMatrix<double> asp(d.a.rows, n);
    {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(d.a.nnz());
      for (int i = 0; i < d.a.rows; ++i)
        for (int k = d.a.row_ptr[static_cast<std::size_t>(i)];
             k < d.a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
          trips.emplace_back(i, d.a.col_idx[static_cast<std::size_t>(k)],
                             d.a.vals[static_cast<std::size_t>(k)]);
      asp.setFromTriplets(trips.begin(), trips.end());
    }
    Eigen::SparseMatrix<double> g = Eigen::SparseMatrix<double>(asp.transpose()) * asp;
    Eigen::SparseMatrix<double> eye(n, n);
    eye.setIdentity();
    g += eye;
    ldlt.compute(g);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solver: factorization of I + A'A failed");
    refresh();
  }

  // recompute the embedding vector after b or c changed; A is untouched
  void refresh() {
    p_vec.resize(data->a.cols + data->a.rows);
    msolve(data->c, data->b, p_vec);
    denom = 1.0 + data->c.dot(p_vec.head(data->a.cols)) +
            data->b.dot(p_vec.tail(data->a.rows));
  }

  // Solve [[I, A'], [-A, I]] z = (rx, ry).
  void msolve(const VectorXd& rx, const VectorXd& ry, VectorXd& z) const {
    const int n = data->a.cols;
    const int m = data->a.rows;
    VectorXd tmp(n);
    spmv(data->at, ry.data(), tmp.data(), exec);
    VectorXd zx = ldlt.solve(rx - tmp);
    z.resize(n + m);
    z.head(n) = zx;
    spmv(data->a, zx.data(), z.tail(m).data(), exec);
    z.tail(m) += ry;
  }

  // Solve (I + Q) u = w for the embedding matrix Q built from (A, b, c).
  void solve_embedding(const VectorXd& w, VectorXd& u) const {
    const int n = data->a.cols;
    const int m = data->a.rows;
    VectorXd rx = w.head(n) - w[n + m] * data->c;
    VectorXd ry = w.segment(n, m) - w[n + m] * data->b;
    VectorXd mz;
    msolve(rx, ry, mz);
    const double gamma =
        data->c.dot(mz.head(n)) + data->b.dot(mz.tail(m));
    u.resize(n + m + 1);
    u.head(n + m) = mz - p_vec * (gamma / denom);
    u[n + m] = w[n + m] + data->c.dot(u.head(n)) + data->b.dot(u.segment(n, m));
  }
};

} // namespace

std::string solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::InfeasibleCertificate: return "infeasible_certificate";
    case SolveStatus::UnboundedCertificate: return "unbounded_certificate";
    case SolveStatus::MaxIters: return "max_iters";
  }
  return "?";
}

Residuals compute_residuals(const ConeProgram& program, const std::vector<double>& x,
                            const std::vector<double>& s,
                            const std::vector<double>& y_dual) {
  const int m = program.num_rows();
  const int n = program.num_vars;
  const CsrMatrix a =
      CsrMatrix::from_triplets(m, n, program.a_rows, program.a_cols, program.a_vals);
  const CsrMatrix at = a.transposed();
  std::vector<double> ax(static_cast<std::size_t>(m));
  spmv(a, x.data(), ax.data(), Exec::Serial);
  std::vector<double> aty(static_cast<std::size_t>(n));
  spmv(at, y_dual.data(), aty.data(), Exec::Serial);
  double pnum = 0.0, bn = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ax[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(i)] -
                     program.b[static_cast<std::size_t>(i)];
    pnum += r * r;
    bn += program.b[static_cast<std::size_t>(i)] * program.b[static_cast<std::size_t>(i)];
  }
  double dnum = 0.0, cn = 0.0, pobj = 0.0, dobj = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = aty[static_cast<std::size_t>(j)] + program.c[static_cast<std::size_t>(j)];
    dnum += r * r;
    cn += program.c[static_cast<std::size_t>(j)] * program.c[static_cast<std::size_t>(j)];
    pobj += program.c[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < m; ++i)
    dobj -= program.b[static_cast<std::size_t>(i)] * y_dual[static_cast<std::size_t>(i)];
  Residuals res;
  res.primal = std::sqrt(pnum) / (1.0 + std::sqrt(bn));
  res.dual = std::sqrt(dnum) / (1.0 + std::sqrt(cn));
  res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return res;
}

ConeSolution solve(const ConeProgram& program, const SolveOptions& opts) {
  program.validate();
  if (!(opts.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
  const int m = program.num_rows();
  const int n = program.num_vars;

  ScaledData d = equilibrate(program, opts.ruiz_iters);
  LinearSystem lin;
  lin.factor(d, opts.exec);
  // cumulative rhs/objective scale; the adaptive rebalancing below moves it
  double sigma_b = d.sigma_b, sigma_c = d.sigma_c;

  const int N = n + m + 1;
  VectorXd u = VectorXd::Zero(N), v = VectorXd::Zero(N);
  u[N - 1] = 1.0;
  v[N - 1] = 1.0;
  VectorXd w(N), ut(N);

  // Map a scaled-space candidate back to the original variables.
  auto unscale = [&](const VectorXd& xs, const VectorXd& ys, const VectorXd& ss,
                     std::vector<double>& x, std::vector<double>& y,
                     std::vector<double>& s) {
    x.resize(static_cast<std::size_t>(n));
    y.resize(static_cast<std::size_t>(m));
    s.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < n; ++j)
      x[static_cast<std::size_t>(j)] = sigma_b * xs[j] / d.col_scale[j];
    for (int i = 0; i < m; ++i) {
      y[static_cast<std::size_t>(i)] = sigma_c * ys[i] / d.row_scale[i];
      s[static_cast<std::size_t>(i)] = sigma_b * ss[i] * d.row_scale[i];
    }
  };

  // Rebalance the primal/dual weighting when one residual lags the other by
  // an order of magnitude: scaling b (or c) by gamma with the matching
  // iterate remap leaves the embedding identities intact.
  auto rescale_b = [&](double gamma) {
    d.b *= gamma;
    sigma_b /= gamma; // recovered x = sigma_b * x_scaled; x_scaled grows by gamma
    u.head(n) *= gamma;
    v.segment(n, m) *= gamma;
    v[N - 1] *= gamma;
    lin.refresh();
  };
  auto rescale_c = [&](double gamma) {
    d.c *= gamma;
    sigma_c /= gamma;
    u.segment(n, m) *= gamma;
    v[N - 1] *= gamma;
    lin.refresh();
  };

  ConeSolution sol;
  std::vector<double> cand_x, cand_y, cand_s;

  auto finalize = [&](SolveStatus status, int iter, std::string msg) {
    sol.status = status;
    sol.iters = iter;
    sol.message = std::move(msg);
    sol.x = cand_x;
    sol.y_dual = cand_y;
    sol.s = cand_s;
    sol.residuals = compute_residuals(program, sol.x, sol.s, sol.y_dual);
    double pobj = 0.0, dobj = 0.0;
    for (int j = 0; j < n; ++j)
      pobj += program.c[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
    for (int i = 0; i < m; ++i)
      dobj -= program.b[static_cast<std::size_t>(i)] * sol.y_dual[static_cast<std::size_t>(i)];
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    return sol;
  };

  const double alpha = opts.relaxation;
  double balance = 1.0; // cumulative primal/dual rebalancing factor
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    w = u + v;
    lin.solve_embedding(w, ut);
    // over-relaxed splitting step
    ut = alpha * ut + (1.0 - alpha) * u;
    VectorXd proj = ut - v;
    project_onto_cones(program.cones, proj.data() + n, /*project_dual=*/true,
                       opts.exec);
    if (proj[N - 1] < 0.0) proj[N - 1] = 0.0;
    v += proj - ut;
    u = proj;

    if (iter % opts.check_interval != 0 && iter != opts.max_iters) continue;

    const double tau = u[N - 1];
    if (tau > 1e-12) {
      const VectorXd xs = u.head(n) / tau;
      const VectorXd ys = u.segment(n, m) / tau;
      const VectorXd ss = v.segment(n, m) / tau;
      unscale(xs, ys, ss, cand_x, cand_y, cand_s);
      const Residuals res = compute_residuals(program, cand_x, cand_s, cand_y);
      if (res.primal <= opts.tol && res.dual <= opts.tol && res.gap <= opts.tol)
        return finalize(SolveStatus::Optimal, iter, "");

      if (opts.adapt_interval > 0 && iter % opts.adapt_interval == 0 &&
          iter < opts.max_iters) {
        const double pr = std::max(res.primal, 1e-16);
        const double du = std::max(res.dual, 1e-16);
        if (pr > 3.0 * du && balance < 1e4) {
          const double gamma = std::min(std::sqrt(pr / du), 10.0);
          rescale_b(gamma);
          balance *= gamma;
        } else if (du > 3.0 * pr && balance > 1e-4) {
          const double gamma = std::min(std::sqrt(du / pr), 10.0);
          rescale_c(gamma);
          balance /= gamma;
        }
      }
    }

    // Certificate checks in the scaled space (||b|| = ||c|| = 1 there).
    const VectorXd& uy = u.segment(n, m);
    const double bty = d.b.dot(uy);
    if (bty < -1e-12) {
      VectorXd aty(n);
      spmv(d.at, uy.data(), aty.data(), opts.exec);
      if (aty.norm() / (-bty) <= opts.tol) {
        VectorXd ys = uy / (-bty);
        unscale(VectorXd::Zero(n), ys, VectorXd::Zero(m), cand_x, cand_y, cand_s);
        return finalize(SolveStatus::InfeasibleCertificate, iter,
                        "primal infeasibility certificate: A'y = 0, b'y < 0");
      }
    }
    const double ctx = d.c.dot(u.head(n));
    if (ctx < -1e-12) {
      VectorXd ax(m);
      spmv(d.a, u.data(), ax.data(), opts.exec);
      VectorXd scone = -ax;
      project_onto_cones(program.cones, scone.data(), /*project_dual=*/false,
                         opts.exec);
      if ((ax + scone).norm() / (-ctx) <= opts.tol) {
        VectorXd xs = u.head(n) / (-ctx);
        unscale(xs, VectorXd::Zero(m), VectorXd::Zero(m), cand_x, cand_y, cand_s);
        return finalize(SolveStatus::UnboundedCertificate, iter,
                        "dual infeasibility certificate: Ax + s = 0, c'x < 0");
      }
    }
  }

  if (cand_x.empty()) {
    cand_x.assign(static_cast<std::size_t>(n), 0.0);
    cand_y.assign(static_cast<std::size_t>(m), 0.0);
    cand_s.assign(static_cast<std::size_t>(m), 0.0);
  }
  return finalize(SolveStatus::MaxIters, opts.max_iters,
                  "iteration limit reached before residuals met the tolerance");
}

} // namespace rank1
