#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rank1/cones.hpp"
#include "rank1/parallel.hpp"

namespace rank1 {

// Conic standard form:
//   minimize    c'x
//   subject to  A x + s = b,  s in K,
// where K is the ordered product of the cone blocks below. Every row of A
// belongs to exactly one block.
struct ConeProgram {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<int> a_rows, a_cols; // triplets
  std::vector<double> a_vals;
  std::vector<double> b;
  std::vector<ConeSpec> cones;
  std::vector<std::string> var_names;

  int num_rows() const { return static_cast<int>(b.size()); }
  void validate() const; // throws std::invalid_argument on malformed input

  // Debug dump: header with sizes and the cone list, then one
  // "row col value" triplet per line, then the b and c vectors.
  void write_text(std::ostream& os) const;
};

// Affine expression sum(coeff * var) + constant used by the builder.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {} // NOLINT(google-explicit-constructor)
  static LinExpr var(int index, double coeff = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coeff);
    return e;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

// Incremental construction of a ConeProgram. Cone membership is stated as
// "this vector of affine expressions lies in the cone"; the builder converts
// each expression e(x) into the slack row s = e(x), i.e. A-row = -coeffs,
// b = constant.
class ProgramBuilder {
 public:
  int add_var(std::string name, double obj_coeff = 0.0);
  void add_obj(int var, double coeff);

  void add_zero(const LinExpr& e);            // e(x) = 0
  void add_nonneg(const LinExpr& e);          // e(x) >= 0
  void add_soc(const std::vector<LinExpr>& es);
  void add_rsoc(const std::vector<LinExpr>& es); // 2 e0 e1 >= sum e_k^2
  // Symmetric matrix of expressions, entries listed row-major upper triangle
  // (i <= j); the block asserts the matrix is PSD.
  void add_psd(const std::vector<LinExpr>& upper, int order);

  ConeProgram take();
  int rows_so_far() const { return static_cast<int>(b_.size()); }

 private:
  void push_expr(const LinExpr& e);
  void push_block(ConeKind kind, int dim, const std::vector<LinExpr>& es);

  int num_vars_ = 0;
  std::vector<double> c_;
  std::vector<std::string> names_;
  std::vector<int> rows_, cols_;
  std::vector<double> vals_, b_;
  std::vector<ConeSpec> cones_;
};

} // namespace rank1
