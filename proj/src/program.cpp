#include "rank1/program.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rank1 {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

void ConeProgram::validate() const {
  if (num_vars <= 0) throw std::invalid_argument("program has no variables");
  if (static_cast<int>(c.size()) != num_vars)
    throw std::invalid_argument("objective length does not match num_vars");
  if (a_rows.size() != a_cols.size() || a_rows.size() != a_vals.size())
    throw std::invalid_argument("triplet arrays differ in length");
  const int m = num_rows();
  if (total_slack_rows(cones) != m)
    throw std::invalid_argument("cone dimensions do not cover the rows");
  for (std::size_t k = 0; k < a_rows.size(); ++k) {
    if (a_rows[k] < 0 || a_rows[k] >= m)
      throw std::invalid_argument("constraint row index out of range");
    if (a_cols[k] < 0 || a_cols[k] >= num_vars)
      throw std::invalid_argument("constraint column index out of range");
    if (!std::isfinite(a_vals[k]))
      throw std::invalid_argument("non-finite constraint coefficient");
  }
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite rhs entry");
  for (double v : c)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite objective entry");
  if (!var_names.empty() && static_cast<int>(var_names.size()) != num_vars)
    throw std::invalid_argument("var_names length does not match num_vars");
}

void ConeProgram::write_text(std::ostream& os) const {
  os << "conic_program vars " << num_vars << " rows " << num_rows() << " nnz "
     << a_vals.size() << "\n";
  os << "cones";
  for (const auto& cone : cones)
    os << " " << cone_kind_name(cone.kind) << ":" << cone.dim;
  os << "\n";
  for (std::size_t k = 0; k < a_vals.size(); ++k)
    os << a_rows[k] << " " << a_cols[k] << " " << a_vals[k] << "\n";
  os << "b";
  for (double v : b) os << " " << v;
  os << "\nc";
  for (double v : c) os << " " << v;
  os << "\n";
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [v, cf] : o.terms) terms.emplace_back(v, -cf);
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [v, cf] : terms) cf *= s;
  constant *= s;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

int ProgramBuilder::add_var(std::string name, double obj_coeff) {
  names_.push_back(std::move(name));
  c_.push_back(obj_coeff);
  return num_vars_++;
}

void ProgramBuilder::add_obj(int var, double coeff) {
  c_.at(static_cast<std::size_t>(var)) += coeff;
}

void ProgramBuilder::push_expr(const LinExpr& e) {
  const int row = static_cast<int>(b_.size());
  for (const auto& [v, cf] : e.terms) {
    if (v < 0 || v >= num_vars_)
      throw std::invalid_argument("expression references unknown variable");
    if (cf != 0.0) {
      rows_.push_back(row);
      cols_.push_back(v);
      vals_.push_back(-cf);
    }
  }
  b_.push_back(e.constant);
}

void ProgramBuilder::push_block(ConeKind kind, int dim,
                                const std::vector<LinExpr>& es) {
  cones_.push_back(ConeSpec{kind, dim});
  for (const auto& e : es) push_expr(e);
}

void ProgramBuilder::add_zero(const LinExpr& e) { push_block(ConeKind::Zero, 1, {e}); }

void ProgramBuilder::add_nonneg(const LinExpr& e) {
  push_block(ConeKind::Nonnegative, 1, {e});
}

void ProgramBuilder::add_soc(const std::vector<LinExpr>& es) {
  if (es.size() < 2) throw std::invalid_argument("second-order block needs dim >= 2");
  push_block(ConeKind::SecondOrder, static_cast<int>(es.size()), es);
}

void ProgramBuilder::add_rsoc(const std::vector<LinExpr>& es) {
  if (es.size() < 3)
    throw std::invalid_argument("rotated second-order block needs dim >= 3");
  push_block(ConeKind::RotatedSecondOrder, static_cast<int>(es.size()), es);
}

void ProgramBuilder::add_psd(const std::vector<LinExpr>& upper, int order) {
  if (static_cast<int>(upper.size()) != order * (order + 1) / 2)
    throw std::invalid_argument("psd block: wrong number of entries");
  // upper is row-major upper triangle; slack rows follow the svec layout
  // (column-major lower triangle, off-diagonals scaled by sqrt(2)).
  auto at = [&](int i, int j) -> const LinExpr& {
    if (i > j) std::swap(i, j);
    return upper[static_cast<std::size_t>(i * order - i * (i - 1) / 2 + (j - i))];
  };
  std::vector<LinExpr> rows;
  rows.reserve(static_cast<std::size_t>(order * (order + 1) / 2));
  for (int j = 0; j < order; ++j) {
    rows.push_back(at(j, j));
    for (int i = j + 1; i < order; ++i) rows.push_back(kSqrt2 * at(i, j));
  }
  push_block(ConeKind::Psd, order, rows);
}

ConeProgram ProgramBuilder::take() {
  ConeProgram p;
  p.num_vars = num_vars_;
  p.c = std::move(c_);
  p.a_rows = std::move(rows_);
  p.a_cols = std::move(cols_);
  p.a_vals = std::move(vals_);
  p.b = std::move(b_);
  p.cones = std::move(cones_);
  p.var_names = std::move(names_);
  p.validate();
  return p;
}

} // namespace rank1
