#include "rank1/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "rank1/linalg.hpp"

namespace rank1 {

namespace {
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}
} // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  counter_ = {0, 0, static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32)};
}

void Philox::refill() {
  std::array<std::uint32_t, 4> ctr = counter_;
  std::array<std::uint32_t, 2> key = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  buffer_ = ctr;
  buffer_pos_ = 0;
  if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0) ++counter_[3];
}

std::uint32_t Philox::next_u32() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[static_cast<std::size_t>(buffer_pos_++)];
}

double Philox::uniform() {
  const std::uint64_t hi = next_u32() >> 5; // 27 bits
  const std::uint64_t lo = next_u32() >> 6; // 26 bits
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

double Philox::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_gaussian_ = v * f;
  has_cached_gaussian_ = true;
  return u * f;
}

void SyntheticSpec::validate() const {
  if (n < 1 || p < 1) throw std::invalid_argument("generator needs n, p >= 1");
  if (s < 0 || s > p) throw std::invalid_argument("true sparsity s must lie in [0, p]");
  if (rho < 0 || rho >= 1)
    throw std::invalid_argument("autocorrelation must lie in [0, 1)");
  if (!(snr > 0)) throw std::invalid_argument("SNR must be positive");
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData d;
  d.sigma.resize(spec.p, spec.p);
  for (int i = 0; i < spec.p; ++i)
    for (int j = 0; j < spec.p; ++j) d.sigma(i, j) = std::pow(spec.rho, std::abs(i - j));
  const Eigen::MatrixXd half = linalg::sqrt_psd(d.sigma);

  d.beta0 = Eigen::VectorXd::Zero(spec.p);
  for (int i = 0; i < spec.s; ++i) d.beta0[i] = 1.0;
  const double signal = d.beta0.dot(d.sigma * d.beta0);
  d.sigma2 = spec.s > 0 ? signal / spec.snr : 0.0;

  Philox rng(spec.seed);
  RegressionInstance& inst = d.instance;
  inst.n = spec.n;
  inst.p = spec.p;
  inst.x.resize(spec.n, spec.p);
  Eigen::VectorXd g(spec.p);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.p; ++j) g[j] = rng.gaussian();
    inst.x.row(i) = (half * g).transpose();
  }
  inst.y.resize(spec.n);
  const double noise_sd = std::sqrt(d.sigma2);
  for (int i = 0; i < spec.n; ++i)
    inst.y[i] = inst.x.row(i).dot(d.beta0) + noise_sd * rng.gaussian();
  inst.column_means = Eigen::VectorXd::Zero(spec.p);
  inst.column_norms = Eigen::VectorXd::Ones(spec.p);
  return d;
}

MetricReport metrics(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0,
                     const Eigen::MatrixXd& sigma, double sigma2) {
  if (beta_hat.size() != beta0.size() || sigma.rows() != beta0.size())
    throw std::invalid_argument("metrics: dimension mismatch");
  if (!(sigma2 > 0)) throw std::invalid_argument("metrics: sigma2 must be positive");
  const double signal = beta0.dot(sigma * beta0);
  if (!(signal > 0))
    throw std::invalid_argument("metrics: relative risk undefined for beta0 = 0");
  const Eigen::VectorXd diff = beta_hat - beta0;
  const double err = diff.dot(sigma * diff);

  MetricReport m;
  m.rr = err / signal;
  m.rte = (err + sigma2) / sigma2;
  m.pve = 1.0 - (err + sigma2) / (signal + sigma2);
  for (int i = 0; i < beta_hat.size(); ++i) {
    const bool nz = std::abs(beta_hat[i]) > kNonzeroThreshold;
    if (nz) ++m.nonzeros;
    if (nz && beta0[i] != 0.0) ++m.correct_nonzeros;
  }
  return m;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["rr"] = rr;
  j["rte"] = rte;
  j["pve"] = pve;
  j["nonzeros"] = nonzeros;
  j["correct_nonzeros"] = correct_nonzeros;
  return j.dump();
}

Eigen::VectorXd elastic_net(const RegressionInstance& instance, double alpha,
                            double lambda_reg) {
  if (alpha < 0 || alpha > 1) throw std::invalid_argument("elastic_net: alpha in [0,1]");
  if (lambda_reg < 0) throw std::invalid_argument("elastic_net: lambda >= 0");
  const int p = instance.p;
  const Eigen::MatrixXd& x = instance.x;
  const Eigen::VectorXd& y = instance.y;
  const double l1 = lambda_reg * alpha;
  const double l2 = lambda_reg * (1.0 - alpha);

  // Lipschitz constant of the smooth part 2 X'(Xb - y) + 2 l2 b
  const auto eig = linalg::eigendecompose(x.transpose() * x);
  const double lip = 2.0 * std::max(eig.values[0], 0.0) + 2.0 * l2 + 1e-12;
  const double step = 1.0 / lip;

  auto objective_at = [&](const Eigen::VectorXd& b) {
    return (y - x * b).squaredNorm() + l2 * b.squaredNorm() + l1 * b.lpNorm<1>();
  };
  auto soft = [](double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd momentum = beta;
  double t_accel = 1.0;
  double prev_obj = objective_at(beta);

  for (int iter = 0; iter < 50000; ++iter) {
    const Eigen::VectorXd grad =
        2.0 * (x.transpose() * (x * momentum - y)) + 2.0 * l2 * momentum;
    Eigen::VectorXd next = momentum - step * grad;
    if (l1 > 0)
      for (int j = 0; j < p; ++j) next[j] = soft(next[j], step * l1);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_accel * t_accel));
    momentum = next + ((t_accel - 1.0) / t_next) * (next - beta);
    const double obj = objective_at(next);
    if (obj > prev_obj) { // restart the acceleration when it overshoots
      momentum = next;
      t_accel = 1.0;
    } else {
      t_accel = t_next;
    }
    beta = next;

    if (iter % 20 == 19) {
      bool converged = false;
      const Eigen::VectorXd resid = y - x * beta;
      if (l1 > 0) {
        // dual feasible point by scaling 2r into ||X' theta||_inf <= l1
        Eigen::VectorXd xtr = 2.0 * (x.transpose() * resid);
        if (l2 > 0) xtr -= 2.0 * l2 * beta; // augmented row block X' -> [X' sqrt(l2) I]
        double scale = 1.0;
        const double inf_norm = xtr.lpNorm<Eigen::Infinity>();
        if (inf_norm > l1) scale = l1 / inf_norm;
        // augmented residual r~ = (r, -sqrt(l2) beta), y~ = (y, 0)
        const double theta_dot_y = scale * 2.0 * resid.dot(y);
        const double theta_sq =
            scale * scale * 4.0 * (resid.squaredNorm() + l2 * beta.squaredNorm());
        const double dual = theta_dot_y - 0.25 * theta_sq;
        converged = objective_at(beta) - dual <= 1e-8;
      } else if (l2 > 0) {
        // strongly convex smooth problem: gap <= ||grad||^2 / (4 l2)
        const Eigen::VectorXd g2 = 2.0 * (x.transpose() * (x * beta - y)) + 2.0 * l2 * beta;
        converged = g2.squaredNorm() / (4.0 * l2) <= 1e-8;
      }
      const double obj_now = objective_at(beta);
      if (std::abs(prev_obj - obj_now) <= 1e-10 * (1.0 + std::abs(obj_now)))
        converged = converged || iter > 100;
      if (converged) break;
    }
    prev_obj = obj;
  }
  return beta;
}

EnSelection en_grid(const RegressionInstance& train, const RegressionInstance& val) {
  if (train.p != val.p) throw std::invalid_argument("en_grid: train/val p mismatch");
  const double lmax = (train.x.transpose() * train.y).lpNorm<Eigen::Infinity>();
  const int nlambda = 50;
  std::vector<double> lambdas(nlambda);
  for (int l = 0; l < nlambda; ++l)
    lambdas[static_cast<std::size_t>(l)] =
        lmax * std::pow(1.0 / 200.0, static_cast<double>(l) / (nlambda - 1));

  const int nalpha = 11;
  const int total = nalpha * nlambda;
  std::vector<Eigen::VectorXd> fits(static_cast<std::size_t>(total));
  std::vector<double> errors(static_cast<std::size_t>(total));

#pragma omp parallel for schedule(dynamic) num_threads(thread_budget())
  for (int g = 0; g < total; ++g) {
    const double alpha = 0.1 * (g / nlambda);
    const double lambda = lambdas[static_cast<std::size_t>(g % nlambda)];
    Eigen::VectorXd b = elastic_net(train, alpha, lambda);
    errors[static_cast<std::size_t>(g)] = (val.y - val.x * b).squaredNorm();
    fits[static_cast<std::size_t>(g)] = std::move(b);
  }

  int best = 0;
  for (int g = 1; g < total; ++g)
    if (errors[static_cast<std::size_t>(g)] < errors[static_cast<std::size_t>(best)])
      best = g;

  EnSelection sel;
  sel.beta = fits[static_cast<std::size_t>(best)];
  sel.alpha = 0.1 * (best / nlambda);
  sel.lambda = lambdas[static_cast<std::size_t>(best % nlambda)];
  sel.val_error = errors[static_cast<std::size_t>(best)];
  sel.grid_index = best;
  sel.grid.reserve(static_cast<std::size_t>(total));
  for (int g = 0; g < total; ++g)
    sel.grid.push_back({0.1 * (g / nlambda), lambdas[static_cast<std::size_t>(g % nlambda)],
                        errors[static_cast<std::size_t>(g)],
                        std::move(fits[static_cast<std::size_t>(g)])});
  return sel;
}

Sdp2Selection sdp2_grid(const RegressionInstance& train, const RegressionInstance& val,
                        int k_max, double tol) {
  if (train.p != val.p) throw std::invalid_argument("sdp2_grid: train/val p mismatch");
  Sdp2Selection sel;
  sel.k = 0;
  sel.beta = Eigen::VectorXd::Zero(train.p);
  sel.val_error = val.y.squaredNorm();
  sel.grid.push_back({0, sel.val_error, 0.0, sel.val_error, 0.0, sel.beta});

  for (int k = 1; k <= std::min(k_max, train.p); ++k) {
    RelaxationSpec spec;
    spec.kind = RelaxationKind::SdpR;
    spec.r = 2;
    spec.hyper = HyperParams{0.0, 0.0, k};
    SolveOptions opts;
    opts.tol = tol;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const RelaxedSolution rel = solve_relaxation(train, spec, opts);
      const RoundedEstimate rounded = greedy_round(rel.beta, train, spec.hyper);
      const auto t1 = std::chrono::steady_clock::now();
      const double seconds = std::chrono::duration<double>(t1 - t0).count();
      const double err = (val.y - val.x * rounded.beta).squaredNorm();
      sel.grid.push_back({k, err, rel.nu_lb, rounded.nu_ub, seconds, rounded.beta});
      if (err < sel.val_error) {
        sel.k = k;
        sel.beta = rounded.beta;
        sel.val_error = err;
        sel.certificate = make_certificate(rel.nu_lb, rounded, spec, seconds);
      }
    } catch (const std::exception&) {
      sel.skipped_k.push_back(k);
    }
  }
  return sel;
}

} // namespace rank1
