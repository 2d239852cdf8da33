#include "rank1/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rank1 {

void HyperParams::validate(int p) const {
  if (lambda < 0 || mu < 0)
    throw std::invalid_argument("regularization weights must be nonnegative");
  if (k < 1 || k > p)
    throw std::invalid_argument("cardinality bound k must lie in [1, p]");
}

namespace {

char detect_delimiter(const std::string& header) {
  const char candidates[] = {',', ';', '\t'};
  char best = ',';
  std::size_t best_count = 0;
  for (char d : candidates) {
    const std::size_t count =
        static_cast<std::size_t>(std::count(header.begin(), header.end(), d));
    if (count > best_count) {
      best_count = count;
      best = d;
    }
  }
  return best;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) {
    // trim whitespace and a possible trailing carriage return
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, int row, int col) {
  if (cell.empty() || cell == "NA" || cell == "?" || cell == "nan")
    throw std::runtime_error("missing value at data row " + std::to_string(row) +
                             ", column " + std::to_string(col + 1));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size())
    throw std::runtime_error("cannot parse '" + cell + "' at data row " +
                             std::to_string(row) + ", column " +
                             std::to_string(col + 1));
  return v;
}

} // namespace

RegressionInstance load_csv(const std::string& path,
                            const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const char delim = detect_delimiter(line);
  const std::vector<std::string> header = split_line(line, delim);
  const int ncols = static_cast<int>(header.size());
  if (ncols < 2) throw std::runtime_error(path + ": need at least two columns");

  int resp = -1;
  if (response_column == "last") {
    resp = ncols - 1;
  } else {
    for (int j = 0; j < ncols; ++j)
      if (header[static_cast<std::size_t>(j)] == response_column) resp = j;
    if (resp < 0)
      throw std::runtime_error(path + ": response column '" + response_column +
                               "' not found");
  }

  std::vector<std::vector<double>> rows;
  int data_row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++data_row;
    const auto cells = split_line(line, delim);
    if (static_cast<int>(cells.size()) != ncols)
      throw std::runtime_error(path + ": data row " + std::to_string(data_row) +
                               " has " + std::to_string(cells.size()) +
                               " fields, expected " + std::to_string(ncols));
    std::vector<double> vals(cells.size());
    for (int j = 0; j < ncols; ++j)
      vals[static_cast<std::size_t>(j)] =
          parse_cell(cells[static_cast<std::size_t>(j)], data_row, j);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  RegressionInstance inst;
  inst.n = static_cast<int>(rows.size());
  inst.p = ncols - 1;
  inst.x.resize(inst.n, inst.p);
  inst.y.resize(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    int col = 0;
    for (int j = 0; j < ncols; ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (j == resp)
        inst.y[i] = v;
      else
        inst.x(i, col++) = v;
    }
  }
  inst.column_means = Eigen::VectorXd::Zero(inst.p);
  inst.column_norms = Eigen::VectorXd::Ones(inst.p);
  return inst;
}

RegressionInstance standardize(const RegressionInstance& instance) {
  RegressionInstance out = instance;
  Eigen::VectorXd means(instance.p), norms(instance.p);
  for (int j = 0; j < instance.p; ++j) {
    means[j] = instance.x.col(j).mean();
    out.x.col(j).array() -= means[j];
    norms[j] = out.x.col(j).norm();
    if (norms[j] < 1e-12 * std::max(1.0, std::abs(means[j])) || norms[j] == 0.0)
      throw std::runtime_error("zero-variance column " + std::to_string(j));
    out.x.col(j) /= norms[j];
  }
  const double ym = instance.y.mean();
  out.y.array() -= ym;
  // compose with any previous standardization so the map back to raw
  // coefficients stays exact
  out.column_means = instance.column_means + instance.column_norms.cwiseProduct(means);
  out.column_norms = instance.column_norms.cwiseProduct(norms);
  out.y_mean = instance.y_mean + ym;
  out.standardized = true;
  return out;
}

Eigen::MatrixXd gram(const RegressionInstance& instance, double lambda) {
  Eigen::MatrixXd q = instance.x.transpose() * instance.x;
  q.diagonal().array() += lambda;
  return 0.5 * (q + q.transpose());
}

double diagonal_dominance(const Eigen::MatrixXd& q, double tol) {
  if (q.rows() != q.cols()) throw std::invalid_argument("dd: matrix not square");
  const int p = static_cast<int>(q.rows());
  const double trace = q.trace();
  if (!(trace > 0)) throw std::invalid_argument("dd: trace must be positive");

  ProgramBuilder pb;
  std::vector<int> d(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    d[static_cast<std::size_t>(i)] = pb.add_var("d[" + std::to_string(i) + "]", -1.0);
  for (int i = 0; i < p; ++i) pb.add_nonneg(LinExpr::var(d[static_cast<std::size_t>(i)]));
  std::vector<LinExpr> upper;
  upper.reserve(static_cast<std::size_t>(p * (p + 1) / 2));
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      LinExpr e(q(i, j));
      if (i == j) e -= LinExpr::var(d[static_cast<std::size_t>(i)]);
      upper.push_back(e);
    }
  pb.add_psd(upper, p);

  SolveOptions opts;
  opts.tol = tol;
  const ConeSolution sol = solve(pb.take(), opts);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("dd: solver did not converge (" +
                             solve_status_name(sol.status) + ")");
  double total = 0.0;
  for (int i = 0; i < p; ++i) total += std::max(0.0, sol.x[static_cast<std::size_t>(i)]);
  return total / trace;
}

std::string RegressionInstance::to_manifest_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["p"] = p;
  j["standardized"] = standardized;
  j["y_mean"] = y_mean;
  j["column_means"] = std::vector<double>(column_means.data(), column_means.data() + p);
  j["column_norms"] = std::vector<double>(column_norms.data(), column_norms.data() + p);
  return j.dump(2);
}

} // namespace rank1
