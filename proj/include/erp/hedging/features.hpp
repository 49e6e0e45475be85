#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "erp/core/errors.hpp"

namespace erp::hedging {

/// Feature layout {T - t_n, log(S_n / K), V_n / V_scale, I_n}.
///
/// With `normalize_value` the portfolio value is divided by the midpoint of
/// the initial-capital search interval; otherwise (CVaR objectives) it enters
/// raw. `state_scale` multiplies the auxiliary state componentwise (empty
/// means identity).
struct FeatureSpec {
  double maturity = 60.0 / 260.0;
  double period_length = 1.0 / 260.0;
  double strike = 100.0;
  bool normalize_value = true;
  double value_scale = 1.0;
  std::size_t state_dim = 0;
  std::vector<double> state_scale;

  static constexpr std::size_t kValueIndex = 2;

  [[nodiscard]] std::size_t dim() const { return 3 + state_dim; }

  /// d feature / d V_n.
  [[nodiscard]] double value_derivative() const { return normalize_value ? 1.0 / value_scale : 1.0; }

  [[nodiscard]] double scale_of(std::size_t k) const {
    return state_scale.empty() ? 1.0 : state_scale[k];
  }

  void validate() const {
    require(maturity > 0.0 && period_length > 0.0, "feature spec needs positive maturity and period");
    require(strike > 0.0, "feature spec strike must be > 0");
    require(!normalize_value || value_scale > 0.0, "normalizing value scale must be > 0");
    require(state_scale.empty() || state_scale.size() == state_dim,
            "state_scale must match the state dimension");
  }
};

/// Writes the feature vector for rebalancing date n into `out` (length dim()).
inline void write_features(const FeatureSpec& spec, std::size_t n, double stock, double value,
                           std::span<const double> state, double* out) {
  out[0] = spec.maturity - static_cast<double>(n) * spec.period_length;
  out[1] = std::log(stock / spec.strike);
  out[2] = spec.normalize_value ? value / spec.value_scale : value;
  for (std::size_t k = 0; k < spec.state_dim; ++k) out[3 + k] = state[k] * spec.scale_of(k);
}

inline std::vector<double> build_features(const FeatureSpec& spec, std::size_t n, double stock,
                                          double value, std::span<const double> state) {
  require(stock > 0.0 && std::isfinite(stock), "build_features: stock price must be > 0");
  require(std::isfinite(value), "build_features: portfolio value must be finite");
  require(state.size() == spec.state_dim, "build_features: state dimension mismatch");
  std::vector<double> out(spec.dim());
  write_features(spec, n, stock, value, state, out.data());
  return out;
}

}  // namespace erp::hedging
