#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "erp/core/errors.hpp"

namespace erp::risk {

enum class MeasureKind { semi_lp, cvar };

/// Either semi-L^p with exponent p > 0 or CVaR at level alpha in (0,1).
struct RiskMeasureSpec {
  MeasureKind kind = MeasureKind::semi_lp;
  double p = 2.0;
  double alpha = 0.95;

  static RiskMeasureSpec semi_lp(double p) { return {MeasureKind::semi_lp, p, 0.0}; }
  static RiskMeasureSpec cvar(double alpha) { return {MeasureKind::cvar, 0.0, alpha}; }

  [[nodiscard]] bool translation_invariant() const { return kind == MeasureKind::cvar; }

  /// p < 1 is allowed but x^p is concave there.
  [[nodiscard]] bool concave_power() const { return kind == MeasureKind::semi_lp && p < 1.0; }

  void validate() const {
    if (kind == MeasureKind::semi_lp) {
      require(p > 0.0 && std::isfinite(p), "semi-L^p exponent p must be > 0");
    } else {
      require(alpha > 0.0 && alpha < 1.0, "CVaR level alpha must lie in (0, 1)");
    }
  }

  [[nodiscard]] std::string label() const {
    char buf[32];
    if (kind == MeasureKind::semi_lp) {
      std::snprintf(buf, sizeof buf, "semi-L%g", p);
    } else {
      std::snprintf(buf, sizeof buf, "CVaR%g", alpha);
    }
    return buf;
  }
};

namespace detail {

inline void check_sample(std::span<const double> sample) {
  require(!sample.empty(), "risk estimators need a non-empty sample");
}

/// 1-based rank ceil(alpha * n), guarded against alpha * n landing one ulp
/// above an integer.
inline std::size_t var_rank(double alpha, std::size_t n) {
  const double scaled = alpha * static_cast<double>(n);
  auto rank = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<std::size_t>(rank, 1, n);
}

}  // namespace detail

/// ((1/n) sum pi_i^p 1{pi_i > 0})^{1/p}, evaluated as
/// exp((logsumexp(p log pi_i) - log n) / p) over the positive entries.
inline double semi_lp(std::span<const double> sample, double p) {
  detail::check_sample(sample);
  require(p > 0.0 && std::isfinite(p), "semi-L^p exponent p must be > 0");
  double max_log = -std::numeric_limits<double>::infinity();
  for (double x : sample) {
    if (x > 0.0) max_log = std::max(max_log, std::log(x));
  }
  if (!std::isfinite(max_log)) return 0.0;
  double sum = 0.0;
  for (double x : sample) {
    if (x > 0.0) sum += std::exp(p * (std::log(x) - max_log));
  }
  return std::exp(max_log + (std::log(sum) - std::log(static_cast<double>(sample.size()))) / p);
}

/// Index of the ceil(alpha n)-th smallest entry; ties resolve to the lowest index.
inline std::size_t var_index(std::span<const double> sample, double alpha) {
  detail::check_sample(sample);
  require(alpha > 0.0 && alpha < 1.0, "VaR level alpha must lie in (0, 1)");
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = detail::var_rank(alpha, sample.size()) - 1;
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return sample[a] < sample[b] || (sample[a] == sample[b] && a < b);
                   });
  return order[k];
}

/// Empirical VaR: the ceil(alpha n)-th ascending order statistic.
inline double var_hat(std::span<const double> sample, double alpha) {
  return sample[var_index(sample, alpha)];
}

/// VaR + (1/((1-alpha) n)) sum max(pi_i - VaR, 0).
inline double cvar_hat(std::span<const double> sample, double alpha) {
  const double var = var_hat(sample, alpha);
  double excess = 0.0;
  for (double x : sample) excess += std::max(x - var, 0.0);
  return var + excess / ((1.0 - alpha) * static_cast<double>(sample.size()));
}

inline double evaluate(const RiskMeasureSpec& spec, std::span<const double> sample) {
  spec.validate();
  return spec.kind == MeasureKind::semi_lp ? semi_lp(sample, spec.p) : cvar_hat(sample, spec.alpha);
}

/// Value of the estimator and its (sub)gradient with respect to each sample
/// entry, written to `grad`.
///
/// semi-L^p: d rho / d pi_i = rho * w_i / pi_i for pi_i > 0, where w_i are the
/// softmax weights pi_i^p / sum pi_j^p; zero elsewhere.
/// CVaR: VaR is the selected order statistic (lowest index on ties); the
/// selected entry carries 1 - #{pi_j > VaR} / ((1-alpha) n) and every entry
/// strictly above VaR carries 1 / ((1-alpha) n).
inline double evaluate_with_gradient(const RiskMeasureSpec& spec, std::span<const double> sample,
                                     std::span<double> grad) {
  spec.validate();
  detail::check_sample(sample);
  require(grad.size() == sample.size(), "gradient buffer must match the sample size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto n = static_cast<double>(sample.size());

  if (spec.kind == MeasureKind::semi_lp) {
    const double rho = semi_lp(sample, spec.p);
    if (rho == 0.0) return 0.0;
    double max_log = -std::numeric_limits<double>::infinity();
    for (double x : sample) {
      if (x > 0.0) max_log = std::max(max_log, std::log(x));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (sample[i] > 0.0) {
        grad[i] = std::exp(spec.p * (std::log(sample[i]) - max_log));
        sum += grad[i];
      }
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (sample[i] > 0.0) grad[i] = rho * (grad[i] / sum) / sample[i];
    }
    return rho;
  }

  const std::size_t k = var_index(sample, spec.alpha);
  const double var = sample[k];
  const double tail_weight = 1.0 / ((1.0 - spec.alpha) * n);
  double excess = 0.0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] > var) {
      excess += sample[i] - var;
      grad[i] = tail_weight;
      ++above;
    }
  }
  grad[k] = 1.0 - static_cast<double>(above) * tail_weight;
  return var + excess * tail_weight;
}

inline constexpr std::array<double, 4> kTailLevels{0.90, 0.95, 0.99, 0.999};

/// Hedging statistics block: mean, VaR/CVaR at the four tail levels, SMSE, MSE.
struct HedgeStatistics {
  std::size_t n = 0;
  double mean = 0.0;
  std::array<double, 4> var{};
  std::array<double, 4> cvar{};
  double smse = 0.0;
  double mse = 0.0;
};

inline HedgeStatistics stats_suite(std::span<const double> sample) {
  detail::check_sample(sample);
  HedgeStatistics s;
  s.n = sample.size();
  const auto n = static_cast<double>(sample.size());
  for (double x : sample) {
    s.mean += x;
    s.mse += x * x;
    if (x > 0.0) s.smse += x * x;
  }
  s.mean /= n;
  s.mse /= n;
  s.smse /= n;
  for (std::size_t l = 0; l < kTailLevels.size(); ++l) {
    s.var[l] = var_hat(sample, kTailLevels[l]);
    s.cvar[l] = cvar_hat(sample, kTailLevels[l]);
  }
  return s;
}

}  // namespace erp::risk

namespace erp::risk {

/// Parses "semi-L2" / "L2" and "CVaR0.95" / "CVaR_0.95"; the inverse of label().
inline RiskMeasureSpec parse_risk_measure(std::string text) {
  auto number = [&](std::size_t from) {
    if (from < text.size() && text[from] == '_') ++from;
    const std::string tail = text.substr(from);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used > 0 && used == tail.size(), "cannot parse risk measure '" + text + "'");
    return v;
  };
  RiskMeasureSpec spec;
  if (text.rfind("CVaR", 0) == 0) {
    spec = RiskMeasureSpec::cvar(number(4));
  } else if (text.rfind("semi-L", 0) == 0) {
    spec = RiskMeasureSpec::semi_lp(number(6));
  } else if (text.rfind("L", 0) == 0) {
    spec = RiskMeasureSpec::semi_lp(number(1));
  } else {
    throw ValidationError("unknown risk measure '" + text + "' (expected semi-Lp or CVaRa)");
  }
  spec.validate();
  return spec;
}

}  // namespace erp::risk
