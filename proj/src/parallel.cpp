#include "rank1/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rank1 {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("RANK1_SPARSE_THREADS");
  if (!s) return 0;
  const int n = std::atoi(s);
  return n > 0 ? n : 0;
}

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}
} // namespace

int thread_budget() {
  const int forced = g_threads.load(std::memory_order_relaxed);
  if (forced > 0) return forced;
  const int env = env_threads();
  if (env > 0) return env;
  return hardware_threads();
}

void set_threads(int n) { g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed); }

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, const std::vector<int>& ti,
                                   const std::vector<int>& tj,
                                   const std::vector<double>& tv) {
  if (ti.size() != tj.size() || ti.size() != tv.size())
    throw std::invalid_argument("CsrMatrix: triplet arrays differ in length");
  CsrMatrix a;
  a.rows = rows;
  a.cols = cols;
  a.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (std::size_t k = 0; k < ti.size(); ++k) {
    if (ti[k] < 0 || ti[k] >= rows || tj[k] < 0 || tj[k] >= cols)
      throw std::out_of_range("CsrMatrix: triplet index out of range");
    ++a.row_ptr[static_cast<std::size_t>(ti[k]) + 1];
  }
  std::partial_sum(a.row_ptr.begin(), a.row_ptr.end(), a.row_ptr.begin());
  a.col_idx.resize(tv.size());
  a.vals.resize(tv.size());
  std::vector<int> next(a.row_ptr.begin(), a.row_ptr.end() - 1);
  for (std::size_t k = 0; k < ti.size(); ++k) {
    const int pos = next[static_cast<std::size_t>(ti[k])]++;
    a.col_idx[static_cast<std::size_t>(pos)] = tj[k];
    a.vals[static_cast<std::size_t>(pos)] = tv[k];
  }
  // Merge duplicates within each row so spmv results do not depend on
  // insertion order.
  std::size_t write = 0;
  std::vector<int> new_ptr(a.row_ptr.size(), 0);
  for (int i = 0; i < rows; ++i) {
    const int lo = a.row_ptr[static_cast<std::size_t>(i)];
    const int hi = a.row_ptr[static_cast<std::size_t>(i) + 1];
    std::vector<std::pair<int, double>> row;
    row.reserve(static_cast<std::size_t>(hi - lo));
    for (int k = lo; k < hi; ++k)
      row.emplace_back(a.col_idx[static_cast<std::size_t>(k)],
                       a.vals[static_cast<std::size_t>(k)]);
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t out = write;
    for (const auto& [j, v] : row) {
      if (out > write && a.col_idx[out - 1] == j) {
        a.vals[out - 1] += v;
      } else {
        a.col_idx[out] = j;
        a.vals[out] = v;
        ++out;
      }
    }
    write = out;
    new_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(write);
  }
  a.col_idx.resize(write);
  a.vals.resize(write);
  a.row_ptr = std::move(new_ptr);
  return a;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<int> ti, tj;
  std::vector<double> tv;
  ti.reserve(nnz());
  tj.reserve(nnz());
  tv.reserve(nnz());
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[static_cast<std::size_t>(i)];
         k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      ti.push_back(col_idx[static_cast<std::size_t>(k)]);
      tj.push_back(i);
      tv.push_back(vals[static_cast<std::size_t>(k)]);
    }
  return from_triplets(cols, rows, ti, tj, tv);
}

void spmv(const CsrMatrix& a, const double* x, double* y, Exec mode) {
  const int m = a.rows;
  if (mode == Exec::Parallel) {
#pragma omp parallel for schedule(static) num_threads(thread_budget())
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = a.row_ptr[static_cast<std::size_t>(i)];
           k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        acc += a.vals[static_cast<std::size_t>(k)] *
               x[a.col_idx[static_cast<std::size_t>(k)]];
      y[i] = acc;
    }
  } else {
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = a.row_ptr[static_cast<std::size_t>(i)];
           k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        acc += a.vals[static_cast<std::size_t>(k)] *
               x[a.col_idx[static_cast<std::size_t>(k)]];
      y[i] = acc;
    }
  }
}

} // namespace rank1
