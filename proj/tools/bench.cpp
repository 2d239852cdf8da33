// Timing harness comparing the serial reference kernels against the OpenMP
// variants: sparse matvec, cone-product projection, brute-force enumeration.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "rank1/bounds.hpp"
#include "rank1/cones.hpp"
#include "rank1/parallel.hpp"
#include "rank1/synth.hpp"

namespace {

double time_of(int repeats, const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %9.4f ms   openmp %9.4f ms   speedup %.2fx\n", name,
              serial * 1e3, parallel * 1e3, serial / parallel);
}

} // namespace

int main() {
  std::printf("thread budget: %d\n\n", rank1::thread_budget());
  std::mt19937 rng(42);

  {
    const int m = 200000, n = 40000, nnz = 2000000;
    std::vector<int> ti(nnz), tj(nnz);
    std::vector<double> tv(nnz);
    std::uniform_int_distribution<int> ri(0, m - 1), rj(0, n - 1);
    std::uniform_real_distribution<double> rv(-1, 1);
    for (int k = 0; k < nnz; ++k) {
      ti[k] = ri(rng);
      tj[k] = rj(rng);
      tv[k] = rv(rng);
    }
    const auto a = rank1::CsrMatrix::from_triplets(m, n, ti, tj, tv);
    std::vector<double> x(n), y(m);
    for (auto& v : x) v = rv(rng);
    report("spmv 200k x 40k",
           time_of(20, [&] { rank1::spmv(a, x.data(), y.data(), rank1::Exec::Serial); }),
           time_of(20, [&] { rank1::spmv(a, x.data(), y.data(), rank1::Exec::Parallel); }));
  }

  {
    const int nblocks = 600, order = 12;
    std::vector<rank1::ConeSpec> cones(nblocks, {rank1::ConeKind::Psd, order});
    const int rows = rank1::total_slack_rows(cones);
    std::vector<double> v0(rows), v(rows);
    std::uniform_real_distribution<double> rv(-1, 1);
    for (auto& e : v0) e = rv(rng);
    report("psd projection 600 blocks",
           time_of(10, [&] {
             v = v0;
             rank1::project_onto_cones(cones, v.data(), true, rank1::Exec::Serial);
           }),
           time_of(10, [&] {
             v = v0;
             rank1::project_onto_cones(cones, v.data(), true, rank1::Exec::Parallel);
           }));
  }

  {
    rank1::SyntheticSpec spec;
    spec.n = 80;
    spec.p = 22;
    spec.s = 4;
    spec.rho = 0.3;
    spec.snr = 2.0;
    spec.seed = 11;
    const auto data = rank1::generate(spec);
    const rank1::HyperParams hyper{0.01, 0.0, 4};
    report("brute force p=22 k=4",
           time_of(3, [&] { rank1::brute_force_opt(data.instance, hyper, rank1::Exec::Serial); }),
           time_of(3, [&] { rank1::brute_force_opt(data.instance, hyper, rank1::Exec::Parallel); }));
  }
  return 0;
}
