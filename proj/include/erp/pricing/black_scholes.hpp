#pragma once

#include <cmath>
#include <numbers>

#include "erp/core/errors.hpp"

namespace erp::pricing {

/// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

enum class OptionKind { call, put };

struct QuotedOption {
  OptionKind kind = OptionKind::put;
  double strike = 100.0;
  double time_to_maturity = 1.0;
  double iv = 0.2;
  double spot = 100.0;
  double rate = 0.0;

  void validate() const {
    require(time_to_maturity > 0.0 && std::isfinite(time_to_maturity),
            "option time to maturity must be > 0");
    require(iv > 0.0 && std::isfinite(iv), "implied volatility must be > 0");
    require(spot > 0.0 && std::isfinite(spot), "spot must be > 0");
    require(strike > 0.0 && std::isfinite(strike), "strike must be > 0");
    require(std::isfinite(rate), "rate must be finite");
  }
};

/// Black-Scholes price of a European call or put.
inline double bs_price(const QuotedOption& opt) {
  opt.validate();
  const double vol_sqrt_t = opt.iv * std::sqrt(opt.time_to_maturity);
  const double d1 =
      (std::log(opt.spot / opt.strike) + (opt.rate + 0.5 * opt.iv * opt.iv) * opt.time_to_maturity) /
      vol_sqrt_t;
  const double d2 = d1 - vol_sqrt_t;
  const double discounted_strike = std::exp(-opt.rate * opt.time_to_maturity) * opt.strike;
  if (opt.kind == OptionKind::call) {
    return opt.spot * norm_cdf(d1) - discounted_strike * norm_cdf(d2);
  }
  return discounted_strike * norm_cdf(-d2) - opt.spot * norm_cdf(-d1);
}

/// Black-Scholes put delta dP/dS = N(d1) - 1.
inline double bs_put_delta(double spot, double strike, double tau, double vol, double rate) {
  if (tau <= 0.0) return spot < strike ? -1.0 : 0.0;
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * tau) / (vol * std::sqrt(tau));
  return norm_cdf(d1) - 1.0;
}

}  // namespace erp::pricing
