#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "erp/core/errors.hpp"
#include "erp/models/params.hpp"
#include "erp/models/path_batch.hpp"
#include "erp/models/simulate.hpp"
#include "erp/pricing/black_scholes.hpp"

namespace erp::pricing {

enum class PriceMethod { closed_form, series, monte_carlo };

inline const char* method_name(PriceMethod m) {
  switch (m) {
    case PriceMethod::closed_form: return "closed_form";
    case PriceMethod::series: return "series";
    default: return "monte_carlo";
  }
}

/// Risk-neutral price C_0^Q with its Monte Carlo standard error (0 for
/// closed forms).
struct RnPrice {
  double value = 0.0;
  double std_error = 0.0;
  PriceMethod method = PriceMethod::closed_form;
  std::size_t n_paths = 0;
};

inline constexpr std::size_t kMinMonteCarloPaths = 10'000;

namespace detail {

/// Running mean/variance in a fixed accumulation order.
struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  [[nodiscard]] double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

inline void check_put_inputs(const models::TimeGrid& grid, double strike, double spot) {
  grid.validate();
  require(strike > 0.0 && std::isfinite(strike), "strike must be > 0");
  require(spot > 0.0 && std::isfinite(spot), "spot must be > 0");
}

/// Mean payoff of a put over `n` kernel paths starting at `first_path`.
template <class Kernel>
Welford put_payoffs(const Kernel& kernel, int n_days, std::size_t state_dim, std::size_t first_path,
                    std::size_t n, double strike, double spot) {
  models::detail::DailyPath day;
  day.resize(n_days, state_dim, false);
  Welford acc;
  for (std::size_t p = 0; p < n; ++p) {
    kernel(first_path + p, day);
    double log_return = 0.0;
    for (double y : day.y) log_return += y;
    acc.add(std::max(strike - spot * std::exp(log_return), 0.0));
  }
  return acc;
}

}  // namespace detail

/// Q-dynamics parameters for the models whose change of measure is a pure
/// drift shift (BSM, MJD, RS). GARCH uses Duan's measure and is simulated by
/// its own risk-neutral kernel.
inline models::BSMParams q_params(const models::BSMParams& p, double rate) { return {rate, p.sigma}; }

inline models::MJDParams q_params(const models::MJDParams& p, double rate) {
  models::MJDParams q = p;
  q.nu = rate;
  return q;
}

inline models::RSParams q_params(const models::RSParams& p, double rate) {
  models::RSParams q = p;
  q.xi0 = models::initial_probabilities(p);
  for (Eigen::Index i = 0; i < q.mu.size(); ++i) q.mu(i) = rate - 0.5 * p.sigma(i) * p.sigma(i);
  return q;
}

/// Closed-form Black-Scholes put under the BSM Q-dynamics.
inline RnPrice rn_price_bsm_put(const models::BSMParams& params, const models::TimeGrid& grid,
                                double strike, double spot) {
  params.validate();
  detail::check_put_inputs(grid, strike, spot);
  const double maturity = grid.maturity();
  if (params.sigma == 0.0) {
    return {std::max(strike * std::exp(-grid.rate * maturity) - spot, 0.0), 0.0,
            PriceMethod::closed_form, 0};
  }
  return {bs_price({OptionKind::put, strike, maturity, params.sigma, spot, grid.rate}), 0.0,
          PriceMethod::closed_form, 0};
}

/// Merton series: Poisson-weighted Black-Scholes prices conditional on the
/// number of jumps, truncated once the cumulative weight exceeds 1 - 1e-12.
inline RnPrice rn_price_mjd_put(const models::MJDParams& params, const models::TimeGrid& grid,
                                double strike, double spot) {
  params.validate();
  detail::check_put_inputs(grid, strike, spot);
  const double maturity = grid.maturity();
  const double r = grid.rate;
  const double mean_jumps = params.lambda * maturity;
  const double base_drift =
      (r - params.lambda * params.jump_compensator() - 0.5 * params.sigma * params.sigma) * maturity;

  constexpr double kMassTarget = 1.0 - 1e-12;
  constexpr int kMaxTerms = 100'000;
  double cumulative = 0.0;
  double expected_payoff = 0.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double log_weight = mean_jumps > 0.0
                                  ? -mean_jumps + k * std::log(mean_jumps) - std::lgamma(k + 1.0)
                                  : (k == 0 ? 0.0 : -std::numeric_limits<double>::infinity());
    const double weight = std::exp(log_weight);
    const double mean_log = std::log(spot) + base_drift + k * params.mu_jump;
    const double var_log =
        params.sigma * params.sigma * maturity + k * params.sigma_jump * params.sigma_jump;
    double payoff = 0.0;
    if (var_log <= 0.0) {
      payoff = std::max(strike - std::exp(mean_log), 0.0);
    } else {
      const double sd = std::sqrt(var_log);
      const double forward = std::exp(mean_log + 0.5 * var_log);
      const double d1 = (std::log(forward / strike) + 0.5 * var_log) / sd;
      const double d2 = d1 - sd;
      payoff = strike * norm_cdf(-d2) - forward * norm_cdf(-d1);
    }
    expected_payoff += weight * payoff;
    cumulative += weight;
    if (cumulative >= kMassTarget) {
      return {std::exp(-r * maturity) * expected_payoff, 0.0, PriceMethod::series, 0};
    }
  }
  throw NumericalError("Merton series: Poisson weights did not reach 1 - 1e-12");
}

/// C_0^Q = e^{-rT} sum_i xi_{0,i} E^Q[Phi | h_0 = i], each conditional
/// expectation by `n_mc` Monte Carlo paths under the drift-shifted dynamics.
inline RnPrice rn_price_rs_put(const models::RSParams& params, const models::TimeGrid& grid,
                               double strike, double spot, std::size_t n_mc, std::uint64_t seed) {
  params.validate();
  detail::check_put_inputs(grid, strike, spot);
  require(n_mc >= kMinMonteCarloPaths, "RS Monte Carlo pricer needs n_mc >= 10^4");
  const models::RSParams q = q_params(params, grid.rate);
  const Eigen::VectorXd xi0 = models::initial_probabilities(params);
  const double discount = std::exp(-grid.rate * grid.maturity());
  double value = 0.0;
  double variance = 0.0;
  for (int i = 0; i < q.n_regimes(); ++i) {
    if (xi0(i) == 0.0) continue;
    const models::detail::RsKernel kernel(q, grid.days_per_year, seed, i, false);
    const auto acc = detail::put_payoffs(kernel, grid.n_days(), kernel.state_dim(),
                                         static_cast<std::size_t>(i) * n_mc, n_mc, strike, spot);
    value += xi0(i) * acc.mean;
    variance += xi0(i) * xi0(i) * acc.variance() / static_cast<double>(n_mc);
  }
  return {discount * value, discount * std::sqrt(variance), PriceMethod::monte_carlo,
          n_mc * static_cast<std::size_t>(q.n_regimes())};
}

/// Monte Carlo under Duan's risk-neutral GJR-GARCH dynamics.
inline RnPrice rn_price_garch_put(const models::GarchParams& params, const models::TimeGrid& grid,
                                  double strike, double spot, std::size_t n_mc, std::uint64_t seed) {
  params.validate();
  detail::check_put_inputs(grid, strike, spot);
  require(n_mc >= kMinMonteCarloPaths, "GARCH Monte Carlo pricer needs n_mc >= 10^4");
  const models::detail::GarchKernel kernel{params, grid.days_per_year, seed, grid.rate};
  const auto acc = detail::put_payoffs(kernel, grid.n_days(), 1, 0, n_mc, strike, spot);
  const double discount = std::exp(-grid.rate * grid.maturity());
  return {discount * acc.mean, discount * std::sqrt(acc.variance() / static_cast<double>(n_mc)),
          PriceMethod::monte_carlo, n_mc};
}

/// Risk-neutral put price for any dynamics: closed form for BSM, series for
/// MJD, Monte Carlo for RS and GARCH.
inline RnPrice rn_price_put(const models::Dynamics& dynamics, const models::TimeGrid& grid,
                            double strike, double spot, std::size_t n_mc, std::uint64_t seed) {
  switch (dynamics.index()) {
    case 0: return rn_price_bsm_put(std::get<models::BSMParams>(dynamics), grid, strike, spot);
    case 1: return rn_price_garch_put(std::get<models::GarchParams>(dynamics), grid, strike, spot, n_mc, seed);
    case 2: return rn_price_rs_put(std::get<models::RSParams>(dynamics), grid, strike, spot, n_mc, seed);
    default: return rn_price_mjd_put(std::get<models::MJDParams>(dynamics), grid, strike, spot);
  }
}

/// Simulates paths under the risk-neutral measure of the given dynamics.
inline models::PathBatch q_simulate(const models::Dynamics& dynamics, const models::TimeGrid& grid,
                                    std::size_t n_paths, std::uint64_t seed,
                                    const models::SimulationOptions& options = {}) {
  models::validate(dynamics);
  switch (dynamics.index()) {
    case 0:
      return models::simulate_bsm(q_params(std::get<models::BSMParams>(dynamics), grid.rate), grid,
                                  n_paths, seed, options);
    case 1: {
      const auto& p = std::get<models::GarchParams>(dynamics);
      return models::detail::assemble(
          models::detail::GarchKernel{p, grid.days_per_year, seed, grid.rate}, 1, grid, n_paths,
          seed, options);
    }
    case 2:
      return models::simulate_rs(q_params(std::get<models::RSParams>(dynamics), grid.rate), grid,
                                 n_paths, seed, options);
    default:
      return models::simulate_mjd(q_params(std::get<models::MJDParams>(dynamics), grid.rate), grid,
                                  n_paths, seed, options);
  }
}

}  // namespace erp::pricing
