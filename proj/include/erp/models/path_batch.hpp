#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erp/core/errors.hpp"

namespace erp::models {

/// Simulated market scenarios sampled at the rebalancing dates.
///
/// Layouts are row-major per path:
///   stock        n_paths x (N+1)       S_n^{(0,b)}, n = 0..N
///   log_returns  n_paths x N           y_{n+1} = log(S_{n+1} / S_n)
///   state        n_paths x N x d_I     I_n observed at t_n, n = 0..N-1
///   asset_*      n_paths x N x D       traded instrument prices; empty when
///                                      the stock is the only instrument
///   regimes      n_paths x (N+1)       latent regime (RS diagnostics only)
struct PathBatch {
  std::size_t n_paths = 0;
  std::size_t n_periods = 0;
  std::size_t state_dim = 0;
  std::size_t option_assets = 0;
  double period_length = 0.0;

  std::vector<double> stock;
  std::vector<double> log_returns;
  std::vector<double> state;
  std::vector<double> asset_begin;
  std::vector<double> asset_end;
  std::vector<int> regimes;

  PathBatch() = default;
  PathBatch(std::size_t paths, std::size_t periods, std::size_t state_dimension, double delta)
      : n_paths(paths),
        n_periods(periods),
        state_dim(state_dimension),
        period_length(delta),
        stock(paths * (periods + 1)),
        log_returns(paths * periods),
        state(paths * periods * state_dimension) {}

  /// Number of risky hedging instruments.
  [[nodiscard]] std::size_t n_assets() const { return option_assets == 0 ? 1 : option_assets; }
  [[nodiscard]] bool stock_only() const { return option_assets == 0; }

  [[nodiscard]] double stock_at(std::size_t path, std::size_t n) const {
    return stock[path * (n_periods + 1) + n];
  }
  [[nodiscard]] double terminal_stock(std::size_t path) const { return stock_at(path, n_periods); }
  [[nodiscard]] double log_return(std::size_t path, std::size_t n) const {
    return log_returns[path * n_periods + n];
  }
  [[nodiscard]] std::span<const double> state_at(std::size_t path, std::size_t n) const {
    return {state.data() + (path * n_periods + n) * state_dim, state_dim};
  }

  /// Beginning-of-period price of instrument j over period n.
  [[nodiscard]] double begin_price(std::size_t path, std::size_t n, std::size_t j) const {
    if (stock_only()) return stock_at(path, n);
    return asset_begin[(path * n_periods + n) * option_assets + j];
  }
  /// End-of-period price of instrument j over period n.
  [[nodiscard]] double end_price(std::size_t path, std::size_t n, std::size_t j) const {
    if (stock_only()) return stock_at(path, n + 1);
    return asset_end[(path * n_periods + n) * option_assets + j];
  }

  [[nodiscard]] bool has_regimes() const { return !regimes.empty(); }
  [[nodiscard]] int regime_at(std::size_t path, std::size_t n) const {
    return regimes[path * (n_periods + 1) + n];
  }

  void check_consistent() const {
    require(stock.size() == n_paths * (n_periods + 1), "PathBatch: stock size mismatch");
    require(log_returns.size() == n_paths * n_periods, "PathBatch: log_returns size mismatch");
    require(state.size() == n_paths * n_periods * state_dim, "PathBatch: state size mismatch");
    const std::size_t asset_size = n_paths * n_periods * option_assets;
    require(asset_begin.size() == asset_size && asset_end.size() == asset_size,
            "PathBatch: asset price size mismatch");
    require(regimes.empty() || regimes.size() == n_paths * (n_periods + 1),
            "PathBatch: regime diagnostics size mismatch");
  }
};

}  // namespace erp::models
