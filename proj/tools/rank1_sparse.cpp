// Command-line front end: data ingestion, conic relaxations with bound
// certificates, diagonal dominance, synthetic benchmarks, penalty surfaces.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rank1/bounds.hpp"
#include "rank1/cuts.hpp"
#include "rank1/instance.hpp"
#include "rank1/penalty.hpp"
#include "rank1/relaxations.hpp"
#include "rank1/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;

void write_output(const std::string& text, const std::string& path) {
  std::cout << text << std::endl;
  if (!path.empty()) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text << "\n";
  }
}

rank1::RegressionInstance load_data(const std::string& path,
                                    const std::string& response, bool raw) {
  rank1::RegressionInstance inst = rank1::load_csv(path, response);
  if (!raw) inst = rank1::standardize(inst);
  return inst;
}

struct RelaxArgs {
  std::string data, response = "last", kind = "sdp2", out;
  double lambda = 0.0, mu = 0.0, tol = 1e-6;
  int k = 1, max_iters = 200000, cut_rounds = 50;
  double cut_tol = 1e-6;
  std::string psd_mode = "full";
  bool raw = false, no_timing = false;
};

int run_relax(const RelaxArgs& a) {
  const rank1::RegressionInstance inst = load_data(a.data, a.response, a.raw);
  rank1::RelaxationSpec spec;
  spec.hyper = rank1::HyperParams{a.lambda, a.mu, a.k};
  if (a.kind == "persp") {
    spec.kind = rank1::RelaxationKind::Persp;
  } else if (a.kind == "sdp1" || a.kind == "sdp2" || a.kind == "sdp3") {
    spec.kind = rank1::RelaxationKind::SdpR;
    spec.r = a.kind[3] - '0';
  } else if (a.kind == "sdplb") {
    spec.kind = rank1::RelaxationKind::SdpLb;
  } else if (a.kind == "sdpdd") {
    spec.kind = rank1::RelaxationKind::SdpDd;
  } else if (a.kind == "cuts") {
    spec.kind = rank1::RelaxationKind::Cuts;
  } else {
    throw CLI::ValidationError("--kind", "unknown relaxation kind " + a.kind);
  }
  spec.hyper.validate(inst.p);

  rank1::SolveOptions opts;
  opts.tol = a.tol;
  opts.max_iters = a.max_iters;

  const auto t0 = std::chrono::steady_clock::now();
  rank1::RelaxedSolution rel;
  std::optional<rank1::CutTrace> trace;
  if (spec.kind == rank1::RelaxationKind::Cuts) {
    const rank1::PsdMode mode = a.psd_mode == "eigen" ? rank1::PsdMode::EigenCuts
                                                      : rank1::PsdMode::FullPsd;
    auto loop = rank1::cut_loop(inst, spec.hyper, rank1::CutPool::sdd_start(inst.p),
                                mode, a.cut_tol, a.cut_rounds, opts);
    rel = loop.solution;
    trace = loop.trace;
  } else {
    if (spec.kind == rank1::RelaxationKind::SdpR && spec.r >= 3) {
      double blocks = 1.0;
      for (int t = 0; t < spec.r; ++t) blocks = blocks * (inst.p - t) / (t + 1);
      std::cerr << "note: sdp" << spec.r << " builds on the order of " << blocks
                << " subset blocks at p = " << inst.p << "\n";
    }
    rel = rank1::solve_relaxation(inst, spec, opts);
  }
  const rank1::RoundedEstimate rounded = rank1::greedy_round(rel.beta, inst, spec.hyper);
  const auto t1 = std::chrono::steady_clock::now();

  rank1::BoundCertificate cert = rank1::make_certificate(
      rel.nu_lb, rounded, spec, std::chrono::duration<double>(t1 - t0).count());
  json j = json::parse(cert.to_json(!a.no_timing));
  j["status"] = rank1::solve_status_name(rel.status);
  if (trace) j["cut_trace"] = json::parse(trace->to_json());
  write_output(j.dump(2), a.out);
  return rel.status == rank1::SolveStatus::MaxIters ? kExitMaxIters : kExitOk;
}

int run_dd(const std::string& data, const std::string& response, bool raw,
           double tol, const std::string& out) {
  const rank1::RegressionInstance inst = load_data(data, response, raw);
  const double dd = rank1::diagonal_dominance(rank1::gram(inst, 0.0), tol);
  json j;
  j["schema"] = "rank1-sparse/1";
  j["n"] = inst.n;
  j["p"] = inst.p;
  j["dd_percent"] = dd * 100.0;
  write_output(j.dump(2), out);
  return kExitOk;
}

int run_gen(const rank1::SyntheticSpec& spec, const std::string& prefix) {
  const rank1::SyntheticData data = rank1::generate(spec);
  {
    std::ofstream csv(prefix + "_train.csv");
    if (!csv) throw std::runtime_error("cannot write " + prefix + "_train.csv");
    csv.precision(17);
    for (int j = 0; j < spec.p; ++j) csv << "x" << j << ",";
    csv << "y\n";
    for (int i = 0; i < spec.n; ++i) {
      for (int j = 0; j < spec.p; ++j) csv << data.instance.x(i, j) << ",";
      csv << data.instance.y[i] << "\n";
    }
  }
  json j;
  j["schema"] = "rank1-sparse/1";
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["s"] = spec.s;
  j["rho"] = spec.rho;
  j["snr"] = spec.snr;
  j["seed"] = spec.seed;
  j["sigma2"] = data.sigma2;
  j["beta0"] = std::vector<double>(data.beta0.data(), data.beta0.data() + spec.p);
  std::ofstream manifest(prefix + "_truth.json");
  manifest << j.dump(2) << "\n";
  std::cout << "wrote " << prefix << "_train.csv and " << prefix << "_truth.json\n";
  return kExitOk;
}

int run_eval(const std::string& estimate_path, const std::string& truth_path,
             const std::string& out) {
  std::ifstream est_in(estimate_path), truth_in(truth_path);
  if (!est_in) throw std::runtime_error("cannot open " + estimate_path);
  if (!truth_in) throw std::runtime_error("cannot open " + truth_path);
  const json est = json::parse(est_in);
  const json truth = json::parse(truth_in);

  const std::vector<double> bh = est.at("beta").get<std::vector<double>>();
  const std::vector<double> b0 = truth.at("beta0").get<std::vector<double>>();
  const double rho = truth.at("rho").get<double>();
  const double sigma2 = truth.at("sigma2").get<double>();
  const int p = static_cast<int>(b0.size());
  if (static_cast<int>(bh.size()) != p)
    throw std::runtime_error("estimate and truth have different p");

  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
  const Eigen::VectorXd beta_hat = Eigen::Map<const Eigen::VectorXd>(bh.data(), p);
  const Eigen::VectorXd beta0 = Eigen::Map<const Eigen::VectorXd>(b0.data(), p);

  const rank1::MetricReport m = rank1::metrics(beta_hat, beta0, sigma, sigma2);
  write_output(json::parse(m.to_json()).dump(2), out);
  return kExitOk;
}

int run_penalty_grid(double delta1, double delta2, double kappa, double lo, double hi,
                     int steps, const std::string& out) {
  rank1::Penalty2DParams params{delta1, delta2, kappa};
  if (out.empty()) {
    rank1::write_penalty_grid(std::cout, params, lo, hi, steps);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    rank1::write_penalty_grid(os, params, lo, hi, steps);
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_select(const rank1::SyntheticSpec& spec, const std::string& method,
               int k_max, bool emit_grid, const std::string& out) {
  rank1::SyntheticData train = rank1::generate(spec);
  rank1::SyntheticSpec val_spec = spec;
  val_spec.seed = spec.seed + 1; // validation set drawn with the same parameters
  rank1::SyntheticData val = rank1::generate(val_spec);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot write " + out);
    os = &file;
  }

  auto emit = [&](const std::string& m, const json& extra, const Eigen::VectorXd& beta) {
    const rank1::MetricReport rep =
        rank1::metrics(beta, train.beta0, train.sigma, train.sigma2);
    json rec = json::parse(rep.to_json());
    rec["schema"] = "rank1-sparse/1";
    rec["method"] = m;
    rec["n"] = spec.n;
    rec["p"] = spec.p;
    rec["s"] = spec.s;
    rec["rho"] = spec.rho;
    rec["snr"] = spec.snr;
    rec["seed"] = spec.seed;
    for (auto it = extra.begin(); it != extra.end(); ++it) rec[it.key()] = it.value();
    (*os) << rec.dump() << "\n";
  };

  if (method == "en" || method == "both") {
    const rank1::EnSelection sel = rank1::en_grid(train.instance, val.instance);
    if (emit_grid)
      for (const auto& pt : sel.grid)
        emit("elastic_net_grid",
             {{"alpha", pt.alpha}, {"lambda", pt.lambda}, {"val_error", pt.val_error}},
             pt.beta);
    emit("elastic_net",
         {{"alpha", sel.alpha}, {"lambda", sel.lambda}, {"val_error", sel.val_error}},
         sel.beta);
  }
  if (method == "sdp2" || method == "both") {
    const rank1::Sdp2Selection sel =
        rank1::sdp2_grid(train.instance, val.instance, k_max);
    if (emit_grid)
      for (const auto& pt : sel.grid)
        emit("sdp2_grid",
             {{"k", pt.k},
              {"val_error", pt.val_error},
              {"nu_lb", pt.nu_lb},
              {"nu_ub", pt.nu_ub},
              {"solve_seconds", pt.seconds}},
             pt.beta);
    emit("sdp2", {{"k", sel.k}, {"val_error", sel.val_error}}, sel.beta);
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-one convexification toolkit for best-subset sparse regression"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "thread budget (default: RANK1_SPARSE_THREADS or hardware)");

  RelaxArgs ra;
  CLI::App* relax = app.add_subcommand("relax", "solve a conic relaxation and certify a gap");
  relax->add_option("--data", ra.data, "input CSV")->required();
  relax->add_option("--response", ra.response, "response column name or 'last'");
  relax->add_option("--kind", ra.kind, "persp|sdp1|sdp2|sdp3|sdplb|sdpdd|cuts");
  relax->add_option("--lambda", ra.lambda, "Tikhonov weight");
  relax->add_option("--mu", ra.mu, "l1 weight");
  relax->add_option("--k", ra.k, "cardinality bound")->required();
  relax->add_option("--tol", ra.tol, "solver tolerance");
  relax->add_option("--max-iters", ra.max_iters, "solver iteration cap");
  relax->add_option("--cut-rounds", ra.cut_rounds, "cut loop round cap (kind=cuts)");
  relax->add_option("--cut-tol", ra.cut_tol, "cut violation tolerance (kind=cuts)");
  relax->add_option("--psd-mode", ra.psd_mode, "full|eigen (kind=cuts)");
  relax->add_flag("--raw", ra.raw, "skip standardization");
  relax->add_flag("--no-timing", ra.no_timing, "omit timings for byte-stable output");
  relax->add_option("--out", ra.out, "also write the certificate JSON here");

  std::string dd_data, dd_response = "last", dd_out;
  double dd_tol = 1e-6;
  bool dd_raw = false;
  CLI::App* dd = app.add_subcommand("dd", "diagonal dominance of X'X");
  dd->add_option("--data", dd_data, "input CSV")->required();
  dd->add_option("--response", dd_response, "response column name or 'last'");
  dd->add_option("--tol", dd_tol, "solver tolerance");
  dd->add_flag("--raw", dd_raw, "skip standardization");
  dd->add_option("--out", dd_out, "also write the JSON here");

  rank1::SyntheticSpec gspec;
  std::string gen_prefix = "synthetic";
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic benchmark instance");
  gen->add_option("--n", gspec.n, "rows");
  gen->add_option("--p", gspec.p, "predictors");
  gen->add_option("--s", gspec.s, "true support size");
  gen->add_option("--rho", gspec.rho, "predictor autocorrelation");
  gen->add_option("--snr", gspec.snr, "signal-to-noise ratio");
  gen->add_option("--seed", gspec.seed, "seed");
  gen->add_option("--out-prefix", gen_prefix, "output file prefix");

  std::string eval_estimate, eval_truth, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "score an estimator against the truth manifest");
  eval->add_option("--estimate", eval_estimate, "JSON with a 'beta' array")->required();
  eval->add_option("--truth", eval_truth, "truth manifest from gen")->required();
  eval->add_option("--out", eval_out, "also write the JSON here");

  double pg_d1 = 0.0, pg_d2 = 0.0, pg_kappa = 1.0, pg_lo = -2.0, pg_hi = 2.0;
  int pg_steps = 101;
  std::string pg_out;
  CLI::App* pg = app.add_subcommand("penalty_grid", "emit the 2-D penalty surfaces as CSV");
  pg->add_option("--delta1", pg_d1, "diagonal surplus for coordinate 1");
  pg->add_option("--delta2", pg_d2, "diagonal surplus for coordinate 2");
  pg->add_option("--delta", [&pg_d1, &pg_d2](const std::vector<std::string>& v) {
    pg_d1 = pg_d2 = std::stod(v.at(0));
    return true;
  }, "set both surpluses at once");
  pg->add_option("--kappa", pg_kappa, "multiplier");
  pg->add_option("--min", pg_lo, "grid lower bound");
  pg->add_option("--max", pg_hi, "grid upper bound");
  pg->add_option("--steps", pg_steps, "grid points per axis");
  pg->add_option("--out", pg_out, "CSV output path (default stdout)");

  rank1::SyntheticSpec sspec;
  std::string sel_method = "both", sel_out;
  int sel_kmax = 7;
  bool sel_grid = false;
  CLI::App* sel = app.add_subcommand(
      "select", "cross-validated model selection on synthetic data (JSON lines)");
  sel->add_option("--n", sspec.n, "rows");
  sel->add_option("--p", sspec.p, "predictors");
  sel->add_option("--s", sspec.s, "true support size");
  sel->add_option("--rho", sspec.rho, "predictor autocorrelation");
  sel->add_option("--snr", sspec.snr, "signal-to-noise ratio");
  sel->add_option("--seed", sspec.seed, "seed");
  sel->add_option("--method", sel_method, "en|sdp2|both");
  sel->add_option("--k-max", sel_kmax, "largest sparsity tried by sdp2");
  sel->add_flag("--emit-grid", sel_grid, "stream one record per grid point too");
  sel->add_option("--out", sel_out, "JSON-lines output path (default stdout)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) rank1::set_threads(threads);

  try {
    if (relax->parsed()) return run_relax(ra);
    if (dd->parsed()) return run_dd(dd_data, dd_response, dd_raw, dd_tol, dd_out);
    if (gen->parsed()) return run_gen(gspec, gen_prefix);
    if (eval->parsed()) return run_eval(eval_estimate, eval_truth, eval_out);
    if (pg->parsed()) return run_penalty_grid(pg_d1, pg_d2, pg_kappa, pg_lo, pg_hi, pg_steps, pg_out);
    if (sel->parsed()) return run_select(sspec, sel_method, sel_kmax, sel_grid, sel_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
