#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rank1/cones.hpp"
#include "rank1/parallel.hpp"
#include "rank1/solver.hpp"

using namespace rank1;

TEST_CASE("csr construction merges duplicates and sorts columns") {
  // A = [[1, 2], [0, 3]] with the (0,1) entry split across two triplets
  const auto a = CsrMatrix::from_triplets(2, 2, {0, 0, 1, 0}, {0, 1, 1, 1},
                                          {1.0, 1.5, 3.0, 0.5});
  CHECK(a.nnz() == 3);
  std::vector<double> x{1.0, 1.0}, y(2);
  spmv(a, x.data(), y.data(), Exec::Serial);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(3.0));
  const auto at = a.transposed();
  spmv(at, x.data(), y.data(), Exec::Serial);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(5.0));
}

TEST_CASE("serial and parallel spmv agree bitwise") {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> ri(0, 499), rj(0, 199);
  std::uniform_real_distribution<double> rv(-2, 2);
  std::vector<int> ti, tj;
  std::vector<double> tv;
  for (int k = 0; k < 5000; ++k) {
    ti.push_back(ri(rng));
    tj.push_back(rj(rng));
    tv.push_back(rv(rng));
  }
  const auto a = CsrMatrix::from_triplets(500, 200, ti, tj, tv);
  std::vector<double> x(200);
  for (auto& v : x) v = rv(rng);
  std::vector<double> ys(500), yp(500);
  spmv(a, x.data(), ys.data(), Exec::Serial);
  spmv(a, x.data(), yp.data(), Exec::Parallel);
  CHECK(ys == yp);
}

TEST_CASE("serial and parallel cone projection agree bitwise") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> rv(-3, 3);
  std::vector<ConeSpec> cones{{ConeKind::Zero, 3},
                              {ConeKind::Nonnegative, 7},
                              {ConeKind::SecondOrder, 5},
                              {ConeKind::RotatedSecondOrder, 6},
                              {ConeKind::Psd, 6},
                              {ConeKind::Psd, 3},
                              {ConeKind::SecondOrder, 2}};
  const int rows = total_slack_rows(cones);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(rows);
    for (auto& e : v) e = rv(rng);
    std::vector<double> vs = v, vp = v;
    project_onto_cones(cones, vs.data(), true, Exec::Serial);
    project_onto_cones(cones, vp.data(), true, Exec::Parallel);
    CHECK(vs == vp);
    // primal-cone projection too
    vs = v;
    vp = v;
    project_onto_cones(cones, vs.data(), false, Exec::Serial);
    project_onto_cones(cones, vp.data(), false, Exec::Parallel);
    CHECK(vs == vp);
  }
}

TEST_CASE("solver gives identical results in both execution modes") {
  ProgramBuilder pb;
  const int x00 = pb.add_var("X00", 1.0);
  const int x01 = pb.add_var("X01", -0.5);
  const int x11 = pb.add_var("X11", 2.0);
  pb.add_psd({LinExpr::var(x00) - 0.4, LinExpr::var(x01) - 0.6, LinExpr::var(x11) - 1.0}, 2);
  pb.add_nonneg(4.0 - LinExpr::var(x00));
  const ConeProgram prog = pb.take();
  SolveOptions serial;
  serial.exec = Exec::Serial;
  SolveOptions parallel;
  parallel.exec = Exec::Parallel;
  const ConeSolution a = solve(prog, serial);
  const ConeSolution b = solve(prog, parallel);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.iters == b.iters);
  CHECK(a.x == b.x);
  CHECK(a.y_dual == b.y_dual);
}

TEST_CASE("thread budget override") {
  const int before = thread_budget();
  set_threads(3);
  CHECK(thread_budget() == 3);
  set_threads(0);
  CHECK(thread_budget() == before);
}
