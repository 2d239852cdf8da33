#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rank1/solver.hpp"

namespace rank1 {

struct HyperParams {
  double lambda = 0.0; // Tikhonov weight, >= 0
  double mu = 0.0;     // l1 weight, >= 0
  int k = 1;           // cardinality bound, 1..p

  void validate(int p) const;
};

// Regression data plus the standardization bookkeeping needed to map
// coefficients back to the raw scale.
struct RegressionInstance {
  Eigen::MatrixXd x; // n rows, p columns
  Eigen::VectorXd y;
  int n = 0;
  int p = 0;
  bool standardized = false;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_norms;
  double y_mean = 0.0;

  std::string to_manifest_json() const;
};

/// Parse a delimited numeric file with a header row. The delimiter is
/// auto-detected among comma, semicolon and tab. `response_column` selects
/// the response by header name, or "last" for the final column. No value
/// imputation: an empty or non-numeric cell is an error with its location.
RegressionInstance load_csv(const std::string& path,
                            const std::string& response_column = "last");

/// Center the columns of X and y, then scale each column to unit l2 norm.
/// Idempotent; a zero-variance column is an error naming the column.
RegressionInstance standardize(const RegressionInstance& instance);

/// Q = X'X + lambda I.
Eigen::MatrixXd gram(const RegressionInstance& instance, double lambda);

/// Fraction of the trace extractable as a diagonal matrix while staying PSD:
///   (1/tr Q) * max e'd  s.t.  Q - diag(d) psd, d >= 0.
double diagonal_dominance(const Eigen::MatrixXd& q, double tol = 1e-6);

} // namespace rank1
