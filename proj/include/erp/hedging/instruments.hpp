#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "erp/core/errors.hpp"
#include "erp/models/path_batch.hpp"
#include "erp/pricing/black_scholes.hpp"

namespace erp::hedging {

/// European put payoff max(K - S_N, 0).
struct PayoffSpec {
  double strike = 100.0;

  [[nodiscard]] double operator()(double terminal_stock) const {
    return std::max(strike - terminal_stock, 0.0);
  }
  void validate() const { require(strike > 0.0 && std::isfinite(strike), "payoff strike must be > 0"); }
};

enum class HedgeSide { long_side, short_side };

inline const char* side_name(HedgeSide side) {
  return side == HedgeSide::long_side ? "long" : "short";
}

/// Hedging error pi = +Phi - V_N (short) or -Phi - V_N (long).
inline double hedging_error(HedgeSide side, double payoff, double terminal_value) {
  return (side == HedgeSide::short_side ? payoff : -payoff) - terminal_value;
}

enum class InstrumentKind { stock_only, atm_option_pair };

inline const char* instrument_name(InstrumentKind kind) {
  return kind == InstrumentKind::stock_only ? "stock" : "options";
}

/// Number of risky hedging instruments for an instrument set.
inline std::size_t instrument_count(InstrumentKind kind) {
  return kind == InstrumentKind::stock_only ? 1 : 2;
}

/// Adds an ATM call/put pair as the traded instruments. Each period buys the
/// pair struck at the current spot with tenor equal to the holding period,
/// priced by Black-Scholes at the current implied volatility (the last state
/// component); the end-of-period price is the intrinsic value at expiry.
inline models::PathBatch attach_option_pair(models::PathBatch batch, double rate) {
  require(batch.state_dim >= 1, "option hedges need the implied volatility in the path state");
  require(batch.period_length > 0.0, "option hedges need a positive holding period");
  const std::size_t periods = batch.n_periods;
  batch.option_assets = 2;
  batch.asset_begin.assign(batch.n_paths * periods * 2, 0.0);
  batch.asset_end.assign(batch.n_paths * periods * 2, 0.0);
  for (std::size_t p = 0; p < batch.n_paths; ++p) {
    for (std::size_t n = 0; n < periods; ++n) {
      const double spot = batch.stock_at(p, n);
      const double next = batch.stock_at(p, n + 1);
      const double iv = batch.state_at(p, n).back();
      pricing::QuotedOption opt{pricing::OptionKind::call, spot, batch.period_length, iv, spot, rate};
      const double call = pricing::bs_price(opt);
      opt.kind = pricing::OptionKind::put;
      const double put = pricing::bs_price(opt);
      const std::size_t base = (p * periods + n) * 2;
      batch.asset_begin[base] = call;
      batch.asset_begin[base + 1] = put;
      batch.asset_end[base] = std::max(next - spot, 0.0);
      batch.asset_end[base + 1] = std::max(spot - next, 0.0);
    }
  }
  return batch;
}

}  // namespace erp::hedging
