#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "erp/core/errors.hpp"

namespace erp::models {

/// Equally spaced rebalancing dates t_n = n * delta, n = 0..N.
///
/// The dynamics are always stepped one trading day at a time; a rebalancing
/// period spans `days_per_period` days, so delta = days_per_period / days_per_year
/// and T = N * delta hold by construction.
struct TimeGrid {
  int n_periods = 60;
  int days_per_period = 1;
  int days_per_year = 260;
  double rate = 0.02;

  [[nodiscard]] double delta() const {
    return static_cast<double>(days_per_period) / static_cast<double>(days_per_year);
  }
  [[nodiscard]] double day_delta() const { return 1.0 / static_cast<double>(days_per_year); }
  [[nodiscard]] double maturity() const { return n_periods * delta(); }
  [[nodiscard]] int n_days() const { return n_periods * days_per_period; }
  [[nodiscard]] double time(int n) const { return n * delta(); }
  /// Risk-free bond value B_n = exp(r t_n).
  [[nodiscard]] double bond(int n) const { return std::exp(rate * time(n)); }
  /// One-period accrual factor exp(r delta).
  [[nodiscard]] double growth() const { return std::exp(rate * delta()); }

  void validate() const {
    require(n_periods >= 1, "TimeGrid.n_periods must be >= 1");
    require(days_per_period >= 1, "TimeGrid.days_per_period must be >= 1");
    require(days_per_year >= 1, "TimeGrid.days_per_year must be >= 1");
    require(std::isfinite(rate), "TimeGrid.rate must be finite");
  }
};

/// Black-Scholes-Merton dynamics; mu and sigma are annual.
struct BSMParams {
  double mu = 0.0892;
  double sigma = 0.1952;

  void validate() const {
    require(std::isfinite(mu), "BSM.mu must be finite");
    require(std::isfinite(sigma) && sigma >= 0.0, "BSM.sigma must be finite and >= 0");
  }
};

/// GJR-GARCH(1,1) with daily parameters.
struct GarchParams {
  double mu = 2.871e-4;
  double omega = 1.795e-6;
  double upsilon = 0.0540;
  double gamma = 0.6028;
  double beta = 0.9105;
  /// Initial daily variance; the stationary variance when unset.
  std::optional<double> sigma1_sq;

  [[nodiscard]] double persistence() const { return upsilon * (1.0 + gamma * gamma) + beta; }

  [[nodiscard]] double stationary_variance() const {
    require(persistence() < 1.0, "GARCH parameters are not stationary: upsilon*(1+gamma^2)+beta >= 1");
    return omega / (1.0 - persistence());
  }

  [[nodiscard]] double initial_variance() const {
    return sigma1_sq ? *sigma1_sq : stationary_variance();
  }

  void validate() const {
    require(std::isfinite(mu) && std::isfinite(gamma), "GARCH.mu and GARCH.gamma must be finite");
    require(omega > 0.0 && std::isfinite(omega), "GARCH.omega must be > 0");
    require(upsilon >= 0.0 && std::isfinite(upsilon), "GARCH.upsilon must be >= 0");
    require(beta >= 0.0 && std::isfinite(beta), "GARCH.beta must be >= 0");
    if (sigma1_sq) {
      require(*sigma1_sq > 0.0 && std::isfinite(*sigma1_sq), "GARCH.sigma1_sq must be > 0");
    } else {
      (void)stationary_variance();
    }
  }
};

/// Hidden Markov regime-switching lognormal model; mu and sigma are annual.
struct RSParams {
  Eigen::VectorXd mu{{0.1804, -0.2682}};
  Eigen::VectorXd sigma{{0.1193, 0.3328}};
  Eigen::MatrixXd transition{{0.9886, 0.0114}, {0.0355, 0.9645}};
  /// Initial predictive probabilities; the stationary distribution when empty.
  Eigen::VectorXd xi0;

  [[nodiscard]] int n_regimes() const { return static_cast<int>(mu.size()); }

  void validate() const {
    const auto h = mu.size();
    require(h >= 1, "RS needs at least one regime");
    require(sigma.size() == h, "RS.sigma must have one entry per regime");
    require(transition.rows() == h && transition.cols() == h,
            "RS.transition must be H x H");
    for (Eigen::Index i = 0; i < h; ++i) {
      require(std::isfinite(mu(i)), "RS.mu must be finite");
      require(sigma(i) > 0.0 && std::isfinite(sigma(i)), "RS.sigma entries must be > 0");
      double row = 0.0;
      for (Eigen::Index j = 0; j < h; ++j) {
        require(transition(i, j) >= 0.0, "RS.transition entries must be >= 0");
        row += transition(i, j);
      }
      require(std::abs(row - 1.0) < 1e-9,
              "RS.transition row " + std::to_string(i) + " must sum to 1");
    }
    if (xi0.size() != 0) {
      require(xi0.size() == h, "RS.xi0 must have one entry per regime");
      require((xi0.array() >= 0.0).all() && std::abs(xi0.sum() - 1.0) < 1e-9,
              "RS.xi0 must be a probability vector");
    }
  }
};

/// Merton jump-diffusion; nu, sigma and lambda are annual.
struct MJDParams {
  double nu = 0.0875;
  double sigma = 0.1036;
  double lambda = 92.3862;
  double mu_jump = -0.0015;
  double sigma_jump = 0.0160;

  /// Expected relative jump size E[e^zeta] - 1.
  [[nodiscard]] double jump_compensator() const {
    return std::exp(mu_jump + 0.5 * sigma_jump * sigma_jump) - 1.0;
  }

  void validate() const {
    require(std::isfinite(nu) && std::isfinite(mu_jump), "MJD.nu and MJD.mu_jump must be finite");
    require(std::isfinite(sigma) && sigma >= 0.0, "MJD.sigma must be >= 0");
    require(std::isfinite(lambda) && lambda >= 0.0, "MJD.lambda must be >= 0");
    require(std::isfinite(sigma_jump) && sigma_jump >= 0.0, "MJD.sigma_jump must be >= 0");
  }
};

/// Daily log-AR(1) model of the ATM implied volatility.
struct IVParams {
  double kappa = 0.15;
  double theta = std::log(0.15);
  double sigma_iv = 0.06;
  double rho = -0.6;

  [[nodiscard]] double initial_iv() const { return std::exp(theta); }

  void validate() const {
    require(std::isfinite(kappa) && std::isfinite(theta), "IV.kappa and IV.theta must be finite");
    require(std::isfinite(sigma_iv) && sigma_iv >= 0.0, "IV.sigma_iv must be >= 0");
    require(std::abs(rho) <= 1.0, "IV.rho must lie in [-1, 1]");
  }
};

using Dynamics = std::variant<BSMParams, GarchParams, RSParams, MJDParams>;

inline std::string dynamics_name(const Dynamics& d) {
  switch (d.index()) {
    case 0: return "bsm";
    case 1: return "garch";
    case 2: return "rs";
    default: return "mjd";
  }
}

inline void validate(const Dynamics& d) {
  std::visit([](const auto& p) { p.validate(); }, d);
}

/// Parameter sets estimated on S&P 500 daily log-returns (1986-12-31 to 2010-04-01).
namespace presets {
inline BSMParams bsm() { return {}; }
inline GarchParams garch() { return {}; }
inline RSParams regime_switching() { return {}; }
inline MJDParams mjd() { return {}; }
/// Ad hoc one-year jump-diffusion used with option hedges.
inline MJDParams mjd_long() { return {0.1111, 0.1323, 0.25, -0.10, 0.10}; }
inline IVParams implied_vol() { return {}; }
}  // namespace presets

}  // namespace erp::models
