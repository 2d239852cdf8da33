#pragma once

#include <cstdint>
#include <vector>

namespace rank1 {

// Execution mode for the hot kernels. Serial variants are the reference
// implementations; the OpenMP variants must produce identical output
// (per-row/per-block work is never split, so reduction order is preserved).
enum class Exec { Serial, Parallel };

// Process-wide thread budget for the Parallel kernels.
// Resolution order: set_threads() > RANK1_SPARSE_THREADS > hardware.
int thread_budget();
void set_threads(int n); // n <= 0 resets to the default

// Compressed sparse row matrix used by the solver's iteration loop.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr; // size rows+1
  std::vector<int> col_idx;
  std::vector<double> vals;

  static CsrMatrix from_triplets(int rows, int cols,
                                 const std::vector<int>& ti,
                                 const std::vector<int>& tj,
                                 const std::vector<double>& tv);
  CsrMatrix transposed() const;
  std::size_t nnz() const { return vals.size(); }
};

// y = A x. Row-parallel; each row's dot product stays sequential so the
// serial and parallel results are bit-identical.
void spmv(const CsrMatrix& a, const double* x, double* y, Exec mode);

inline void spmv(const CsrMatrix& a, const std::vector<double>& x,
                 std::vector<double>& y, Exec mode) {
  y.resize(static_cast<std::size_t>(a.rows));
  spmv(a, x.data(), y.data(), mode);
}

} // namespace rank1
