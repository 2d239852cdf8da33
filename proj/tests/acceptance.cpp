// Acceptance suite: every criterion prints one PASS/FAIL line; the exit code
// counts gating failures. Criterion 5 needs the public benchmark datasets
// and falls back to criterion 6 when they are absent (see
// scripts/fetch_data.sh). Criterion 8 records its hit rate and flags, but
// never gates.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "rank1/bounds.hpp"
#include "rank1/cuts.hpp"
#include "rank1/instance.hpp"
#include "rank1/penalty.hpp"
#include "rank1/relaxations.hpp"
#include "rank1/synth.hpp"
#include "helpers.hpp"

using namespace rank1;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail,
            bool gating = true) {
  std::printf("criterion %d: %s  %s\n", criterion,
              pass ? "PASS" : (gating ? "FAIL" : "FLAG"), detail.c_str());
  std::fflush(stdout);
  if (!pass && gating) ++g_failures;
}

struct Bound {
  const char* name;
  double value;
  double err; // forward error bound of the reported objective
};

// |c'x - c'x*| <= gap-residual + |y'(Ax+s-b)| + |x'(A'y+c)|, each term
// bounded through the solver's normalized residuals.
double objective_error_bound(const ConeProgram& prog, const ConeSolution& sol) {
  double bn = 0.0, cn = 0.0, xn = 0.0, yn = 0.0;
  for (double v : prog.b) bn += v * v;
  for (double v : prog.c) cn += v * v;
  for (double v : sol.x) xn += v * v;
  for (double v : sol.y_dual) yn += v * v;
  const Residuals& r = sol.residuals;
  return 2.0 * (r.gap * (1.0 + std::abs(sol.primal_obj) + std::abs(sol.dual_obj)) +
                r.primal * (1.0 + std::sqrt(bn)) * std::sqrt(yn) +
                r.dual * (1.0 + std::sqrt(cn)) * std::sqrt(xn));
}

Bound lb_of(const char* name, const RegressionInstance& inst, RelaxationKind kind,
            const HyperParams& hyper, int r, double tol) {
  BuiltRelaxation built;
  switch (kind) {
    case RelaxationKind::Persp: built = build_persp(inst, hyper); break;
    case RelaxationKind::SdpR: built = build_sdp_r(inst, hyper, r, true); break;
    case RelaxationKind::SdpDd: built = build_sdp_dd(inst, hyper); break;
    default: throw std::logic_error("unexpected kind");
  }
  SolveOptions opts;
  opts.tol = tol;
  opts.max_iters = 500000;
  const ConeSolution sol = solve(built.program, opts);
  const RelaxedSolution rel = extract(sol, built, opts.tol);
  return Bound{name, rel.nu_lb, objective_error_bound(built.program, sol)};
}

// ---------------------------------------------------------------- 1
void criterion_dominance_chain() {
  const auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-7;
  bool pass = true;
  std::string worst;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = trial % 2 ? 8 : 6;
    const double lambda = trial % 4 < 2 ? 0.0 : 0.05;
    const HyperParams hyper{lambda, 0.0, 2 + (trial / 2) % 2};
    const auto inst = testutil::random_instance(50, p, 5000 + trial);

    std::vector<Bound> chain;
    if (lambda > 0)
      chain.push_back(lb_of("persp", inst, RelaxationKind::Persp, hyper, 1, tol));
    chain.push_back(lb_of("sdp1", inst, RelaxationKind::SdpR, hyper, 1, tol));
    chain.push_back(lb_of("sdpdd", inst, RelaxationKind::SdpDd, hyper, 1, tol));
    chain.push_back(lb_of("sdp2", inst, RelaxationKind::SdpR, hyper, 2, tol));
    chain.push_back(lb_of("sdp3", inst, RelaxationKind::SdpR, hyper, 3, tol));
    chain.push_back(Bound{"exact", brute_force_opt(inst, hyper).nu, 1e-9});

    for (std::size_t i = 1; i < chain.size(); ++i) {
      const double lo = chain[i - 1].value, hi = chain[i].value;
      const double slack = chain[i - 1].err + chain[i].err;
      if (lo > hi + slack) {
        pass = false;
        worst = std::string(chain[i - 1].name) + " = " + std::to_string(lo) +
                " > " + chain[i].name + " = " + std::to_string(hi) +
                " + slack " + std::to_string(slack) + " (trial " +
                std::to_string(trial) + ")";
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 300.0) pass = false;
  report(1, pass,
         pass ? "relaxation dominance chain held on 20 instances (" +
                    std::to_string(secs) + " s)"
              : "violated: " + worst);
}

// ---------------------------------------------------------------- 2
void criterion_zero_penalty() {
  std::mt19937 rng(6001);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + trial % 8; // 3..10
    const int k = 1 + trial % std::min(4, p);
    const auto inst = testutil::random_instance(20, p, 6100 + trial);
    VectorXd beta = VectorXd::Zero(p);
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < k; ++i) beta[order[i]] = g(rng);
    const double rho =
        rho_r1_general(beta, k, inst, HyperParams{0.0, 0.0, k}, 2, 1e-8);
    worst = std::max(worst, std::abs(rho));
  }
  report(2, worst <= 1e-5,
         "max |rho_r1| over 100 sparse points = " + std::to_string(worst) +
             " (bound 1e-5)");
}

// ---------------------------------------------------------------- 3
void criterion_closed_forms() {
  std::mt19937 rng(6200);
  std::uniform_real_distribution<double> ub(-3.0, 3.0);
  std::uniform_real_distribution<double> ud(0.0, 2.0);
  std::uniform_real_distribution<double> uk(0.2, 3.0);
  double worst_mc = 0.0, worst_r1 = 0.0, worst_dom = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Penalty2DParams params{ud(rng), ud(rng), uk(rng)};
    const Vector2d beta(ub(rng), ub(rng));
    const double mc = rho_mc_plus_2d(beta, params);
    const double r1 = rho_r1_2d(beta, params);
    worst_mc = std::max(worst_mc,
                        std::abs(mc - testutil::numeric_mc_plus(
                                          beta, params.delta1, params.delta2,
                                          params.kappa)));
    worst_r1 = std::max(worst_r1,
                        std::abs(r1 - testutil::numeric_r1(beta, params.delta1,
                                                           params.delta2,
                                                           params.kappa)));
    worst_dom = std::max(worst_dom, mc - r1);
  }
  const bool pass = worst_mc <= 1e-4 && worst_r1 <= 1e-4 && worst_dom <= 1e-9;
  report(3, pass,
         "max |mc - oracle| = " + std::to_string(worst_mc) +
             ", max |r1 - oracle| = " + std::to_string(worst_r1) +
             ", max (mc - r1) = " + std::to_string(worst_dom));
}

// ---------------------------------------------------------------- 4
void criterion_cut_loop() {
  bool pass = true;
  std::string detail;
  double worst_rel = 0.0, worst_dd = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 5 + trial % 4; // 5..8
    const auto inst = testutil::random_instance(40, p, 6300 + trial);
    const HyperParams hyper{trial % 2 ? 0.05 : 0.0, 0.0, 2};
    SolveOptions opts;
    opts.tol = 1e-7;

    const double sdp2 = lb_of("sdp2", inst, RelaxationKind::SdpR, hyper, 2, opts.tol).value;
    const double sdpdd =
        lb_of("sdpdd", inst, RelaxationKind::SdpDd, hyper, 1, opts.tol).value;

    // one round, unit multipliers: the diagonally dominant relaxation
    const auto zero_rounds = cut_loop(inst, hyper, CutPool::sdd_start(p),
                                      PsdMode::FullPsd, 1e-7, 1, opts);
    worst_dd = std::max(worst_dd, std::abs(zero_rounds.solution.nu_lb - sdpdd) /
                                      (1.0 + std::abs(sdpdd)));

    const auto loop = cut_loop(inst, hyper, CutPool::sdd_start(p),
                               PsdMode::FullPsd, 1e-7, 60, opts);
    worst_rel = std::max(worst_rel, std::abs(loop.solution.nu_lb - sdp2) /
                                        (1.0 + std::abs(sdp2)));
  }
  pass = worst_rel <= 1e-3 && worst_dd <= 1e-5;
  report(4, pass,
         "max relative distance to the pair relaxation = " +
             std::to_string(worst_rel) + " (bound 1e-3), first-round vs dd = " +
             std::to_string(worst_dd));
}

// ---------------------------------------------------------------- 5 / 6
bool dataset_available(const std::string& path) {
  return std::ifstream(path).good();
}

void criterion_benchmark_tables(bool* ran) {
  *ran = dataset_available("data/housing.csv");
  if (!*ran) {
    std::printf("criterion 5: SKIP  datasets not present, replaced by criterion 6\n");
    return;
  }
  bool pass = true;
  std::string detail;

  struct DdRow {
    const char* file;
    double expect;
  };
  for (const DdRow& row : {DdRow{"data/housing.csv", 26.7},
                           DdRow{"data/servo.csv", 0.0},
                           DdRow{"data/diabetes.csv", 0.0}}) {
    if (!dataset_available(row.file)) continue;
    const auto inst = standardize(load_csv(row.file));
    const double dd = diagonal_dominance(gram(inst, 0.0)) * 100.0;
    detail += std::string(row.file) + " dd = " + std::to_string(dd) + "%  ";
    if (std::abs(dd - row.expect) > 0.5) pass = false;
  }

  const auto housing = standardize(load_csv("data/housing.csv"));
  {
    RelaxationSpec spec;
    spec.kind = RelaxationKind::SdpR;
    spec.r = 2;
    spec.hyper = HyperParams{0.0, 0.0, 3};
    SolveOptions opts;
    opts.tol = 1e-7;
    opts.max_iters = 400000;
    const auto rel = solve_relaxation(housing, spec, opts);
    const auto rounded = greedy_round(rel.beta, housing, spec.hyper);
    const double gap = gap_percent(rel.nu_lb, rounded.nu_ub);
    detail += "sdp2 k=3 gap = " + std::to_string(gap) + "%  ";
    if (gap > 0.5) pass = false;
  }
  {
    RelaxationSpec spec;
    spec.kind = RelaxationKind::SdpR;
    spec.r = 1;
    spec.hyper = HyperParams{0.0, 0.0, 5};
    SolveOptions opts;
    opts.tol = 1e-7;
    opts.max_iters = 400000;
    const auto rel = solve_relaxation(housing, spec, opts);
    const auto rounded = greedy_round(rel.beta, housing, spec.hyper);
    const double gap = gap_percent(rel.nu_lb, rounded.nu_ub);
    detail += "sdp1 k=5 gap = " + std::to_string(gap) + "%";
    if (gap > 0.2) pass = false;
  }
  report(5, pass, detail);
}

void criterion_oracle_sandwich() {
  std::mt19937 rng(6400);
  int within5 = 0;
  bool sandwich_ok = true;
  std::string worst;
  const double tol = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 6 + trial % 7;          // 6..12
    const int k = 2 + trial % 3;          // 2..4
    const HyperParams hyper{0.05, 0.0, k};
    const auto inst = testutil::random_instance(50, p, 6500 + trial);

    RelaxationSpec spec;
    spec.kind = RelaxationKind::SdpR;
    spec.r = 2;
    spec.hyper = hyper;
    SolveOptions opts;
    opts.tol = tol;
    const auto rel = solve_relaxation(inst, spec, opts);
    const auto rounded = greedy_round(rel.beta, inst, hyper);
    const double exact = brute_force_opt(inst, hyper).nu;

    const double slack = 10.0 * tol * (1.0 + std::abs(exact));
    if (!(rel.nu_lb <= exact + slack && exact <= rounded.nu_ub + slack)) {
      sandwich_ok = false;
      worst = "trial " + std::to_string(trial) + ": lb = " +
              std::to_string(rel.nu_lb) + ", opt = " + std::to_string(exact) +
              ", ub = " + std::to_string(rounded.nu_ub);
    }
    if (exact > 0 && (exact - rel.nu_lb) / exact <= 0.05) ++within5;
  }
  const bool pass = sandwich_ok && within5 >= 40;
  report(6, pass,
         sandwich_ok
             ? "sandwich held on 50 instances; lower bound within 5% of the "
               "optimum on " + std::to_string(within5) + "/50 (need 40)"
             : "sandwich violated: " + worst);
}

// ---------------------------------------------------------------- 7
void criterion_metric_identities() {
  std::mt19937 rng(6600);
  std::normal_distribution<double> g;
  bool pass = true;
  std::string detail = "RTE = RR*SNR + 1 and perfect/null scores";
  for (int trial = 0; trial < 200 && pass; ++trial) {
    SyntheticSpec spec;
    spec.n = 5;
    spec.p = 2 + trial % 6;
    spec.s = 1 + trial % spec.p;
    spec.rho = 0.1 * (trial % 9);
    spec.snr = 0.25 + 0.5 * (trial % 10);
    spec.seed = 6700 + trial;
    const auto d = generate(spec);
    VectorXd hat(spec.p);
    for (int i = 0; i < spec.p; ++i) hat[i] = g(rng);
    const auto m = metrics(hat, d.beta0, d.sigma, d.sigma2);
    if (std::abs(m.rte - (m.rr * spec.snr + 1.0)) > 1e-12 * (1.0 + m.rte))
      pass = false;
    const auto perfect = metrics(d.beta0, d.beta0, d.sigma, d.sigma2);
    const auto null = metrics(VectorXd::Zero(spec.p), d.beta0, d.sigma, d.sigma2);
    if (std::abs(perfect.rr) > 1e-14 || std::abs(perfect.rte - 1.0) > 1e-12 ||
        std::abs(perfect.pve - spec.snr / (1.0 + spec.snr)) > 1e-12)
      pass = false;
    if (std::abs(null.rr - 1.0) > 1e-12 ||
        std::abs(null.rte - (spec.snr + 1.0)) > 1e-11 || std::abs(null.pve) > 1e-12)
      pass = false;
  }
  report(7, pass, detail);
}

// ---------------------------------------------------------------- 8
void criterion_support_recovery() {
  int recovered = 0;
  for (int seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.n = 100;
    spec.p = 20;
    spec.s = 5;
    spec.rho = 0.35;
    spec.snr = 6.0;
    spec.seed = 8000 + 2 * seed;
    const auto train = generate(spec);
    SyntheticSpec vspec = spec;
    vspec.seed = spec.seed + 1;
    const auto val = generate(vspec);
    // rounding only needs the ordering of |beta|, so a 1e-5 solve suffices
    const Sdp2Selection sel = sdp2_grid(train.instance, val.instance, 7, 1e-5);
    const std::vector<int> want{0, 1, 2, 3, 4};
    if (sel.k == 5 && support_of(sel.beta) == want) ++recovered;
  }
  report(8, recovered >= 8,
         "selected k = 5 with the true support on " + std::to_string(recovered) +
             "/10 seeds (threshold 8; recorded, not gating)",
         /*gating=*/false);
}

} // namespace

int main() {
  std::printf("acceptance suite\n");
  auto guarded = [](int criterion, auto&& fn, bool gating = true) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(criterion, false, std::string("exception: ") + e.what(), gating);
    }
  };
  guarded(1, criterion_dominance_chain);
  guarded(2, criterion_zero_penalty);
  guarded(3, criterion_closed_forms);
  guarded(4, criterion_cut_loop);
  bool benchmark_tables_ran = false;
  guarded(5, [&] { criterion_benchmark_tables(&benchmark_tables_ran); });
  guarded(6, criterion_oracle_sandwich);
  guarded(7, criterion_metric_identities);
  guarded(8, criterion_support_recovery, /*gating=*/false);
  std::printf("%s (%d gating failure%s)\n", g_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE OK",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures;
}
