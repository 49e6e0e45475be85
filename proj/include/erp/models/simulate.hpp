#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "erp/core/errors.hpp"
#include "erp/core/rng.hpp"
#include "erp/models/params.hpp"
#include "erp/models/path_batch.hpp"

namespace erp::models {

struct SimulationOptions {
  double spot = 100.0;
  /// When set, a daily log-AR(1) implied volatility is simulated alongside the
  /// stock and its value at each rebalancing date is appended to the state.
  std::optional<IVParams> implied_vol;
};

/// Solves nu * Gamma = nu with sum(nu) = 1. Throws when the chain has no
/// unique stationary distribution.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const Eigen::Index h = transition.rows();
  require(h >= 1 && transition.cols() == h, "transition matrix must be square");
  Eigen::MatrixXd system(h + 1, h);
  system.topRows(h) = transition.transpose() - Eigen::MatrixXd::Identity(h, h);
  system.row(h).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h + 1);
  rhs(h) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  lu.setThreshold(1e-10);
  require(lu.rank() == h, "transition matrix has no unique stationary distribution");
  Eigen::VectorXd nu = system.colPivHouseholderQr().solve(rhs);
  require((system * nu - rhs).norm() < 1e-9,
          "transition matrix has no unique stationary distribution");
  nu = nu.cwiseMax(0.0);
  return nu / nu.sum();
}

/// Initial predictive probabilities: xi0 when given, otherwise the stationary law.
inline Eigen::VectorXd initial_probabilities(const RSParams& params) {
  if (params.xi0.size() != 0) return params.xi0;
  return stationary_distribution(params.transition);
}

/// One step of the predictive-probability recursion
///   xi_{n+1,j} = sum_i gamma_ij phi_i(y) xi_{n,i} / sum_i phi_i(y) xi_{n,i},
/// with phi_i the Normal(mu_i dt, sigma_i^2 dt) density. Densities are handled
/// in log space with the maximum over supported regimes subtracted.
inline Eigen::VectorXd filter_step(const RSParams& params, const Eigen::VectorXd& xi,
                                   double y_next, double dt) {
  const Eigen::Index h = params.mu.size();
  require(xi.size() == h, "filter_step: probability vector has wrong length");
  Eigen::VectorXd log_weight(h);
  double max_log = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < h; ++i) {
    const double mean = params.mu(i) * dt;
    const double var = params.sigma(i) * params.sigma(i) * dt;
    const double z = y_next - mean;
    log_weight(i) = -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * z * z / var;
    if (xi(i) > 0.0) max_log = std::max(max_log, log_weight(i));
  }
  Eigen::VectorXd weight(h);
  for (Eigen::Index i = 0; i < h; ++i) {
    weight(i) = xi(i) > 0.0 ? std::exp(log_weight(i) - max_log) * xi(i) : 0.0;
  }
  const double denom = weight.sum();
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("filter_step: regime densities underflow (zero denominator)");
  }
  Eigen::VectorXd next = params.transition.transpose() * (weight / denom);
  return next / next.sum();
}

/// Daily log-AR(1) implied volatility path IV_0..IV_{n_days}, driven by
/// Z = rho * eps + sqrt(1 - rho^2) * W with W independent of the return
/// innovations eps.
inline std::vector<double> simulate_iv(const IVParams& params, int n_days,
                                       std::span<const double> return_innovations,
                                       std::uint64_t seed, std::uint64_t path_index = 0) {
  params.validate();
  require(n_days >= 0 && static_cast<std::size_t>(n_days) == return_innovations.size(),
          "simulate_iv: return innovations must have one entry per day");
  CounterRng rng(seed, path_index, Stream::iv_noise);
  const double orth = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));
  std::vector<double> iv(static_cast<std::size_t>(n_days) + 1);
  double log_iv = params.theta;
  iv[0] = std::exp(log_iv);
  for (int d = 0; d < n_days; ++d) {
    const double z = params.rho * return_innovations[d] + orth * rng.normal();
    log_iv += params.kappa * (params.theta - log_iv) + params.sigma_iv * z;
    iv[d + 1] = std::exp(log_iv);
  }
  return iv;
}

namespace detail {

/// Per-path daily output of a dynamics kernel.
struct DailyPath {
  std::vector<double> y;      ///< daily log-returns
  std::vector<double> eps;    ///< Gaussian return innovations (drive the IV model)
  std::vector<double> state;  ///< n_days x state_dim, observed before each day's return
  std::vector<int> regimes;   ///< n_days + 1 latent regimes (RS only)

  void resize(int n_days, std::size_t state_dim, bool with_regimes) {
    y.assign(n_days, 0.0);
    eps.assign(n_days, 0.0);
    state.assign(static_cast<std::size_t>(n_days) * state_dim, 0.0);
    regimes.assign(with_regimes ? n_days + 1 : 0, 0);
  }
};

struct BsmKernel {
  BSMParams params;
  int days_per_year;
  std::uint64_t seed;
  static constexpr std::size_t state_dim = 0;
  static constexpr bool has_regimes = false;

  void operator()(std::size_t path, DailyPath& out) const {
    CounterRng rng(seed, path, Stream::returns);
    const double drift = (params.mu - 0.5 * params.sigma * params.sigma) / days_per_year;
    const double vol = params.sigma * std::sqrt(1.0 / days_per_year);
    for (std::size_t d = 0; d < out.y.size(); ++d) {
      const double e = rng.normal();
      out.eps[d] = e;
      out.y[d] = drift + vol * e;
    }
  }
};

/// GJR-GARCH kernel; with `risk_neutral_rate` set it follows Duan's
/// risk-neutral dynamics (conditional variance unchanged, mean shifted).
struct GarchKernel {
  GarchParams params;
  int days_per_year;
  std::uint64_t seed;
  std::optional<double> risk_neutral_rate;
  static constexpr std::size_t state_dim = 1;
  static constexpr bool has_regimes = false;

  void operator()(std::size_t path, DailyPath& out) const {
    CounterRng rng(seed, path, Stream::returns);
    double var = params.initial_variance();
    const double dt = 1.0 / days_per_year;
    for (std::size_t d = 0; d < out.y.size(); ++d) {
      const double vol = std::sqrt(var);
      out.state[d] = vol;
      const double e = rng.normal();
      out.eps[d] = e;
      double shock = e;
      if (risk_neutral_rate) {
        const double r_dt = *risk_neutral_rate * dt;
        const double psi = (params.mu - r_dt + 0.5 * var) / vol;
        out.y[d] = r_dt - 0.5 * var + vol * e;
        shock = e - psi;
      } else {
        out.y[d] = params.mu + vol * e;
      }
      const double lever = std::abs(shock) - params.gamma * shock;
      var = params.omega + params.upsilon * var * lever * lever + params.beta * var;
    }
  }
};

struct MjdKernel {
  MJDParams params;
  int days_per_year;
  std::uint64_t seed;
  static constexpr std::size_t state_dim = 0;
  static constexpr bool has_regimes = false;

  void operator()(std::size_t path, DailyPath& out) const {
    CounterRng diffusion(seed, path, Stream::returns);
    CounterRng jumps(seed, path, Stream::jumps);
    const double dt = 1.0 / days_per_year;
    const double drift =
        (params.nu - params.lambda * params.jump_compensator() - 0.5 * params.sigma * params.sigma) /
        days_per_year;
    const double vol = params.sigma * std::sqrt(dt);
    const double intensity = params.lambda * dt;
    for (std::size_t d = 0; d < out.y.size(); ++d) {
      const double e = diffusion.normal();
      out.eps[d] = e;
      double jump = 0.0;
      if (const auto k = jumps.poisson(intensity); k > 0) {
        const double kk = static_cast<double>(k);
        jump = kk * params.mu_jump + std::sqrt(kk) * params.sigma_jump * jumps.normal();
      }
      out.y[d] = drift + vol * e + jump;
    }
  }
};

struct RsKernel {
  RSParams params;
  Eigen::VectorXd xi0;
  Eigen::VectorXd regime_law;  ///< law of h_0
  int days_per_year;
  std::uint64_t seed;
  std::optional<int> initial_regime;
  bool track_filter = true;
  static constexpr bool has_regimes = true;

  RsKernel(RSParams p, int dpy, std::uint64_t s, std::optional<int> h0 = {}, bool filter = true)
      : params(std::move(p)), days_per_year(dpy), seed(s), initial_regime(h0), track_filter(filter) {
    xi0 = initial_probabilities(params);
    regime_law = xi0;
  }

  [[nodiscard]] std::size_t state_dim() const { return static_cast<std::size_t>(params.mu.size()); }

  static int sample(const Eigen::VectorXd& probs, double u) {
    double cdf = 0.0;
    const auto h = static_cast<int>(probs.size());
    for (int i = 0; i < h - 1; ++i) {
      cdf += probs(i);
      if (u < cdf) return i;
    }
    return h - 1;
  }

  void operator()(std::size_t path, DailyPath& out) const {
    CounterRng returns(seed, path, Stream::returns);
    CounterRng chain(seed, path, Stream::regimes);
    const double dt = 1.0 / days_per_year;
    const double sqrt_dt = std::sqrt(dt);
    const std::size_t h_count = state_dim();
    int h = initial_regime ? *initial_regime : sample(regime_law, chain.uniform());
    Eigen::VectorXd xi = xi0;
    for (std::size_t d = 0; d < out.y.size(); ++d) {
      if (track_filter) {
        for (std::size_t i = 0; i < h_count; ++i) out.state[d * h_count + i] = xi(static_cast<Eigen::Index>(i));
      }
      if (!out.regimes.empty()) out.regimes[d] = h;
      const double e = returns.normal();
      out.eps[d] = e;
      out.y[d] = params.mu(h) / days_per_year + params.sigma(h) * sqrt_dt * e;
      if (track_filter) xi = filter_step(params, xi, out.y[d], dt);
      h = sample(params.transition.row(h).transpose(), chain.uniform());
    }
    if (!out.regimes.empty()) out.regimes[out.y.size()] = h;
  }
};

/// Runs a kernel path by path and samples the daily output at rebalancing dates.
template <class Kernel>
PathBatch assemble(const Kernel& kernel, std::size_t model_state_dim, const TimeGrid& grid,
                   std::size_t n_paths, std::uint64_t seed, const SimulationOptions& options) {
  grid.validate();
  require(n_paths >= 1, "simulation needs n_paths >= 1");
  require(options.spot > 0.0 && std::isfinite(options.spot), "spot price must be > 0");
  if (options.implied_vol) options.implied_vol->validate();

  const int n_days = grid.n_days();
  const auto periods = static_cast<std::size_t>(grid.n_periods);
  const auto dpp = static_cast<std::size_t>(grid.days_per_period);
  const std::size_t state_dim = model_state_dim + (options.implied_vol ? 1 : 0);

  PathBatch batch(n_paths, periods, state_dim, grid.delta());
  if (Kernel::has_regimes) batch.regimes.resize(n_paths * (periods + 1));

  DailyPath day;
  day.resize(n_days, model_state_dim, Kernel::has_regimes);
  for (std::size_t p = 0; p < n_paths; ++p) {
    kernel(p, day);
    std::vector<double> iv;
    if (options.implied_vol) iv = simulate_iv(*options.implied_vol, n_days, day.eps, seed, p);

    double* stock = batch.stock.data() + p * (periods + 1);
    double* y = batch.log_returns.data() + p * periods;
    double* state = batch.state.data() + p * periods * state_dim;
    stock[0] = options.spot;
    for (std::size_t n = 0; n < periods; ++n) {
      double sum = 0.0;
      for (std::size_t d = n * dpp; d < (n + 1) * dpp; ++d) sum += day.y[d];
      y[n] = sum;
      stock[n + 1] = stock[n] * std::exp(sum);
      const std::size_t first_day = n * dpp;
      for (std::size_t k = 0; k < model_state_dim; ++k) {
        state[n * state_dim + k] = day.state[first_day * model_state_dim + k];
      }
      if (options.implied_vol) state[n * state_dim + model_state_dim] = iv[first_day];
      if (Kernel::has_regimes) batch.regimes[p * (periods + 1) + n] = day.regimes[first_day];
    }
    if (Kernel::has_regimes) batch.regimes[p * (periods + 1) + periods] = day.regimes[periods * dpp];
  }
  return batch;
}

}  // namespace detail

inline PathBatch simulate_bsm(const BSMParams& params, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, const SimulationOptions& options = {}) {
  params.validate();
  return detail::assemble(detail::BsmKernel{params, grid.days_per_year, seed}, 0, grid, n_paths,
                          seed, options);
}

inline PathBatch simulate_garch(const GarchParams& params, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed,
                                const SimulationOptions& options = {}) {
  params.validate();
  return detail::assemble(detail::GarchKernel{params, grid.days_per_year, seed, std::nullopt}, 1,
                          grid, n_paths, seed, options);
}

inline PathBatch simulate_mjd(const MJDParams& params, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, const SimulationOptions& options = {}) {
  params.validate();
  return detail::assemble(detail::MjdKernel{params, grid.days_per_year, seed}, 0, grid, n_paths,
                          seed, options);
}

inline PathBatch simulate_rs(const RSParams& params, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, const SimulationOptions& options = {}) {
  params.validate();
  detail::RsKernel kernel(params, grid.days_per_year, seed);
  return detail::assemble(kernel, kernel.state_dim(), grid, n_paths, seed, options);
}

/// Physical-measure simulation for any supported dynamics.
inline PathBatch simulate(const Dynamics& dynamics, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, const SimulationOptions& options = {}) {
  struct Visitor {
    const TimeGrid& grid;
    std::size_t n;
    std::uint64_t seed;
    const SimulationOptions& options;
    PathBatch operator()(const BSMParams& p) const { return simulate_bsm(p, grid, n, seed, options); }
    PathBatch operator()(const GarchParams& p) const { return simulate_garch(p, grid, n, seed, options); }
    PathBatch operator()(const RSParams& p) const { return simulate_rs(p, grid, n, seed, options); }
    PathBatch operator()(const MJDParams& p) const { return simulate_mjd(p, grid, n, seed, options); }
  };
  return std::visit(Visitor{grid, n_paths, seed, options}, dynamics);
}

/// Dimension of the model part of the auxiliary state I_n.
inline std::size_t model_state_dim(const Dynamics& dynamics) {
  switch (dynamics.index()) {
    case 1: return 1;
    case 2: return static_cast<std::size_t>(std::get<RSParams>(dynamics).n_regimes());
    default: return 0;
  }
}

}  // namespace erp::models
