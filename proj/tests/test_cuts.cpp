#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <json.hpp>

#include "rank1/cuts.hpp"
#include "helpers.hpp"

using namespace rank1;
using Eigen::VectorXd;

namespace {
double solve_kind(const RegressionInstance& inst, RelaxationKind kind,
                  const HyperParams& hyper, int r = 2) {
  RelaxationSpec spec;
  spec.kind = kind;
  spec.r = r;
  spec.hyper = hyper;
  SolveOptions opts;
  opts.tol = 1e-7;
  return solve_relaxation(inst, spec, opts).nu_lb;
}
} // namespace

TEST_CASE("cut pool bookkeeping") {
  CutPool pool = CutPool::empty(4);
  CHECK(pool.pair_index(0, 1) == 0);
  CHECK(pool.pair_index(0, 2) == 1);
  CHECK(pool.pair_index(1, 2) == 2);
  CHECK(pool.pair_index(2, 3) == 5);
  CHECK(pool.total_cuts() == 0);
  CHECK(pool.add_plus(0, 1, 1.0));
  CHECK(!pool.add_plus(0, 1, 1.0 + 1e-12)); // dedup within relative 1e-9
  CHECK(pool.add_plus(0, 1, 2.0));
  CHECK(pool.add_minus(2, 3, 0.5));
  CHECK(pool.total_cuts() == 3);
  CHECK_THROWS_AS(static_cast<void>(pool.add_plus(0, 1, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(pool.add_plus(0, 1, -1.0)), std::invalid_argument);
  const CutPool sdd = CutPool::sdd_start(4);
  CHECK(sdd.total_cuts() == 12);
}

TEST_CASE("unit multipliers reproduce the diagonally dominant relaxation") {
  for (unsigned seed = 0; seed < 3; ++seed) {
    const auto inst = testutil::random_instance(25, 5, 900 + seed);
    const HyperParams hyper{seed == 2 ? 0.05 : 0.0, 0.0, 2};
    const double dd = solve_kind(inst, RelaxationKind::SdpDd, hyper);
    const auto built = build_cut_relaxation(inst, hyper, CutPool::sdd_start(5),
                                            PsdMode::FullPsd);
    SolveOptions opts;
    opts.tol = 1e-7;
    const auto rel = extract(solve(built.program, opts), built, opts.tol);
    CHECK(rel.nu_lb == doctest::Approx(dd).epsilon(1e-5));
  }
}

TEST_CASE("empty pool with the full block stays below sdp_2") {
  const auto inst = testutil::random_instance(25, 5, 910);
  const HyperParams hyper{0.0, 0.0, 2};
  const double sdp2 = solve_kind(inst, RelaxationKind::SdpR, hyper, 2);
  const auto built =
      build_cut_relaxation(inst, hyper, CutPool::empty(5), PsdMode::FullPsd);
  SolveOptions opts;
  opts.tol = 1e-7;
  const auto rel = extract(solve(built.program, opts), built, opts.tol);
  CHECK(rel.nu_lb <= sdp2 + 1e-5 * std::max(1.0, std::abs(sdp2)));
}

TEST_CASE("adding multipliers never loosens the bound") {
  const auto inst = testutil::random_instance(25, 4, 920);
  const HyperParams hyper{0.0, 0.0, 2};
  SolveOptions opts;
  opts.tol = 1e-7;
  CutPool pool = CutPool::sdd_start(4);
  const auto base = build_cut_relaxation(inst, hyper, pool, PsdMode::FullPsd);
  const double v0 = extract(solve(base.program, opts), base, opts.tol).nu_lb;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ua(0.2, 5.0);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      pool.add_plus(i, j, ua(rng));
      pool.add_minus(i, j, ua(rng));
    }
  const auto more = build_cut_relaxation(inst, hyper, pool, PsdMode::FullPsd);
  const double v1 = extract(solve(more.program, opts), more, opts.tol).nu_lb;
  CHECK(v1 >= v0 - 1e-5 * std::max(1.0, std::abs(v0)));
}

TEST_CASE("separation formulas") {
  SUBCASE("symmetric ratio gives alpha = 1") {
    RelaxedSolution sol;
    sol.beta = (VectorXd(2) << 1.0, 1.0).finished();
    sol.b_mat.resize(2, 2);
    sol.b_mat << 2.0, 0.0, 0.0, 2.0;
    sol.w[{0, 1}] = 1.0;
    const Separation sep = separate_alpha(sol, 0, 1);
    REQUIRE(sep.alpha_plus.has_value());
    CHECK(*sep.alpha_plus == doctest::Approx(1.0));
    // plus violation: 1 - 0 - sqrt(1 * 1) = 0; minus: -1 - sqrt(1) < 0
    CHECK(sep.violation_plus == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sep.violation_minus == doctest::Approx(-2.0));
  }
  SUBCASE("a solution satisfying the 3x3 block has no violated family") {
    std::mt19937 rng(6);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
      // random psd block [[w, b'],[b, B]] scaled to w
      Eigen::Matrix3d m;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = g(rng);
      m = (m * m.transpose()).eval();
      const double w = m(0, 0);
      if (w < 1e-3) continue;
      // [[w, b'], [b, B]] = m is psd, so neither family can be violated
      RelaxedSolution sol;
      sol.beta = (VectorXd(2) << m(1, 0), m(2, 0)).finished();
      sol.b_mat = m.bottomRightCorner(2, 2);
      sol.w[{0, 1}] = w;
      const Separation sep = separate_alpha(sol, 0, 1);
      if (sep.degenerate) continue;
      CHECK(sep.violation_plus <= 1e-9);
      CHECK(sep.violation_minus <= 1e-9);
    }
  }
  SUBCASE("degenerate pair is flagged") {
    RelaxedSolution sol;
    sol.beta = (VectorXd(2) << 0.0, 0.0).finished();
    sol.b_mat = Eigen::MatrixXd::Zero(2, 2);
    sol.w[{0, 1}] = 0.0;
    CHECK(separate_alpha(sol, 0, 1).degenerate);
  }
  SUBCASE("direct formula evaluation") {
    RelaxedSolution sol;
    sol.beta = (VectorXd(2) << 1.0, 0.5).finished();
    sol.b_mat.resize(2, 2);
    sol.b_mat << 3.0, 0.25, 0.25, 2.0;
    sol.w[{0, 1}] = 0.5;
    const Separation sep = separate_alpha(sol, 0, 1);
    const double den_i = 3.0 * 0.5 - 1.0;  // 0.5
    const double den_j = 2.0 * 0.5 - 0.25; // 0.75
    REQUIRE(sep.alpha_plus.has_value());
    CHECK(*sep.alpha_plus == doctest::Approx(std::sqrt(den_j / den_i)));
    CHECK(sep.violation_plus ==
          doctest::Approx(0.5 - 0.125 - std::sqrt(den_i * den_j)));
    CHECK(sep.violation_minus ==
          doctest::Approx(-0.5 + 0.125 - std::sqrt(den_i * den_j)));
  }
}

TEST_CASE("generated cuts are valid for the mixed-integer set") {
  // at integer points with beta supported on z and B = beta beta' / w scaled,
  // no alpha row can be violated
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ua(0.05, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double zi = rng() % 2, zj = rng() % 2;
    const double bi = zi ? g(rng) : 0.0;
    const double bj = zj ? g(rng) : 0.0;
    const double w = std::min(1.0, zi + zj);
    if (w == 0.0) continue;
    const double alpha = ua(rng);
    // feasible lift: B = beta beta' (w = 1 at any integer point with
    // zi + zj >= 1)
    const double lhs = (alpha * bi * bi + 2 * bi * bj + bj * bj / alpha) / w;
    const double rhs = 2 * bi * bj + alpha * bi * bi + bj * bj / alpha;
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("cut loop") {
  SUBCASE("p = 1 exits immediately with no pairs") {
    RegressionInstance inst;
    inst.n = 3;
    inst.p = 1;
    inst.x.resize(3, 1);
    inst.x << 0.7, -0.7, 0.14;
    inst.y.resize(3);
    inst.y << 0.5, -1.0, 0.2;
    const auto res = cut_loop(inst, HyperParams{0.0, 0.0, 1}, CutPool::empty(1),
                              PsdMode::FullPsd, 1e-6, 10);
    CHECK(res.trace.rounds.size() == 1);
    CHECK(res.trace.rounds[0].max_violation == doctest::Approx(0.0));
    CHECK(res.pool.total_cuts() == 0);
  }
  SUBCASE("objective is nondecreasing round over round") {
    // start from an empty pool so the first separation has work to do
    const auto inst = testutil::random_instance(25, 5, 930);
    const auto res = cut_loop(inst, HyperParams{0.0, 0.0, 2}, CutPool::empty(5),
                              PsdMode::FullPsd, 1e-8, 12);
    REQUIRE(res.trace.rounds.size() >= 2);
    for (std::size_t r = 1; r < res.trace.rounds.size(); ++r) {
      const double prev = res.trace.rounds[r - 1].objective;
      CHECK(res.trace.rounds[r].objective >= prev - 1e-5 * (1.0 + std::abs(prev)));
    }
  }
  SUBCASE("converges to the pair-block relaxation") {
    for (unsigned seed = 0; seed < 3; ++seed) {
      const auto inst = testutil::random_instance(30, 5, 940 + seed);
      const HyperParams hyper{0.0, 0.0, 2};
      const double sdp2 = solve_kind(inst, RelaxationKind::SdpR, hyper, 2);
      const auto res = cut_loop(inst, hyper, CutPool::sdd_start(5), PsdMode::FullPsd,
                                1e-7, 40);
      CHECK(res.solution.nu_lb ==
            doctest::Approx(sdp2).epsilon(1e-3)); // relative agreement
      CHECK(res.solution.nu_lb <= sdp2 + 1e-4 * std::max(1.0, std::abs(sdp2)));
    }
  }
  SUBCASE("trace exports as json") {
    const auto inst = testutil::random_instance(20, 4, 950);
    const auto res = cut_loop(inst, HyperParams{0.0, 0.0, 2}, CutPool::sdd_start(4),
                              PsdMode::FullPsd, 1e-6, 5);
    const auto j = nlohmann::json::parse(res.trace.to_json());
    CHECK(j["rounds"].size() == res.trace.rounds.size());
    CHECK(j["rounds"][0].contains("objective"));
    CHECK(j["rounds"][0].contains("max_violation"));
    CHECK(j["solver_warning"] == false);
  }
}

TEST_CASE("regenerated multipliers for a satisfied pair stay quiet") {
  const auto inst = testutil::random_instance(25, 4, 960);
  const HyperParams hyper{0.0, 0.0, 2};
  SolveOptions opts;
  opts.tol = 1e-7; // violation tolerance must sit above the solver noise
  const auto res = cut_loop(inst, hyper, CutPool::sdd_start(4), PsdMode::FullPsd,
                            1e-5, 40, opts);
  // after convergence every pair reports violation at or below tolerance
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const Separation sep = separate_alpha(res.solution, i, j);
      if (sep.degenerate) continue;
      CHECK(sep.violation_plus <= 1e-5 + 1e-7);
      CHECK(sep.violation_minus <= 1e-5 + 1e-7);
      if (sep.alpha_plus) CHECK(*sep.alpha_plus > 0);
      if (sep.alpha_plus) CHECK(std::isfinite(*sep.alpha_plus));
    }
}

TEST_CASE("eigen-cut mode bounds the full-psd mode from below") {
  const auto inst = testutil::random_instance(25, 4, 970);
  const HyperParams hyper{0.0, 0.0, 2};
  SolveOptions opts;
  opts.tol = 1e-7;
  const auto full = build_cut_relaxation(inst, hyper, CutPool::sdd_start(4),
                                         PsdMode::FullPsd);
  const auto eig = build_cut_relaxation(inst, hyper, CutPool::sdd_start(4),
                                        PsdMode::EigenCuts);
  const double vf = extract(solve(full.program, opts), full, opts.tol).nu_lb;
  const double ve = extract(solve(eig.program, opts), eig, opts.tol).nu_lb;
  CHECK(ve <= vf + 1e-5 * std::max(1.0, std::abs(vf)));
}
