#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "erp/engine/bisection.hpp"
#include "erp/engine/train.hpp"
#include "erp/hedging/instruments.hpp"
#include "erp/models/params.hpp"
#include "erp/models/simulate.hpp"
#include "erp/pricing/risk_neutral.hpp"

namespace erp::engine {

/// Market, option and instrument choices shared by every cell of an experiment.
struct MarketSetup {
  models::Dynamics dynamics = models::presets::regime_switching();
  models::TimeGrid grid;
  double spot = 100.0;
  double strike = 100.0;
  hedging::InstrumentKind instruments = hedging::InstrumentKind::stock_only;
  models::IVParams implied_vol = models::presets::implied_vol();

  void validate() const {
    models::validate(dynamics);
    grid.validate();
    require(spot > 0.0 && strike > 0.0, "spot and strike must be > 0");
    if (instruments == hedging::InstrumentKind::atm_option_pair) implied_vol.validate();
  }

  [[nodiscard]] models::SimulationOptions simulation_options() const {
    models::SimulationOptions o;
    o.spot = spot;
    if (instruments == hedging::InstrumentKind::atm_option_pair) o.implied_vol = implied_vol;
    return o;
  }
};

/// Training and test scenarios, simulated under P with disjoint seeds.
struct Datasets {
  models::PathBatch train;
  models::PathBatch test;
};

inline models::PathBatch simulate_for(const MarketSetup& setup, std::size_t n_paths, std::uint64_t seed) {
  setup.validate();
  models::PathBatch batch = models::simulate(setup.dynamics, setup.grid, n_paths, seed, setup.simulation_options());
  if (setup.instruments == hedging::InstrumentKind::atm_option_pair) {
    batch = hedging::attach_option_pair(std::move(batch), setup.grid.rate);
  }
  return batch;
}

inline Datasets simulate_datasets(const MarketSetup& setup, const TrainConfig& config) {
  require(config.seeds.train_sim != config.seeds.test_sim, "training and test simulation seeds must differ");
  return {simulate_for(setup, config.n_train_paths, config.seeds.train_sim),
          simulate_for(setup, config.n_test_paths, config.seeds.test_sim)};
}

/// Feature and payoff description. The GARCH volatility state is annualized.
inline hedging::HedgeTask make_task(const MarketSetup& setup, const TrainConfig& config) {
  hedging::HedgeTask task;
  task.payoff.strike = setup.strike;
  task.rate = setup.grid.rate;
  auto& f = task.features;
  f.maturity = setup.grid.maturity();
  f.period_length = setup.grid.delta();
  f.strike = setup.strike;
  f.normalize_value = !config.risk.translation_invariant();
  f.value_scale = config.value_scale();
  const std::size_t model_dim = models::model_state_dim(setup.dynamics);
  f.state_dim = model_dim + (setup.instruments == hedging::InstrumentKind::atm_option_pair ? 1 : 0);
  f.state_scale.assign(f.state_dim, 1.0);
  if (std::holds_alternative<models::GarchParams>(setup.dynamics)) {
    f.state_scale[0] = std::sqrt(static_cast<double>(setup.grid.days_per_year));
  }
  return task;
}

struct ErpCellResult {
  pricing::RnPrice rn;
  ErpSolution solution;
  bool used_shortcut = false;
  /// Number of times the search interval was moved after a no-root result.
  int restarts = 0;
  TrainResult long_net;
  TrainResult short_net;
  hedging::HedgeTask task;

  [[nodiscard]] double premium() const { return solution.c0_star / rn.value - 1.0; }
};

/// Risks of both sides at price V on the test set.
inline SideRisks side_risks(const neural::Network& long_net, const neural::Network& short_net, double v,
                            const models::PathBatch& test, const hedging::HedgeTask& task,
                            const risk::RiskMeasureSpec& spec) {
  return {residual_risk(short_net, v, hedging::HedgeSide::short_side, test, task, spec),
          residual_risk(long_net, -v, hedging::HedgeSide::long_side, test, task, spec)};
}

/// Trains both sides and solves for the equal risk price. Translation-
/// invariant measures train at V0 = 0 and use the closed-form shortcut;
/// semi-L^p trains on the bisection interval and bisects. When the risk gap
/// has no sign change on the interval, the interval is moved one width in
/// the direction of the root and both nets are retrained (at most
/// `max_restarts` times).
inline ErpCellResult run_erp_cell(const MarketSetup& setup, const Datasets& data, TrainConfig config,
                                  const pricing::RnPrice& rn, std::optional<BisectionConfig> bisection = {},
                                  const EpochCallback& on_epoch = {}, int max_restarts = 2) {
  ErpCellResult cell;
  cell.rn = rn;
  BisectionConfig bcfg = bisection ? *bisection : BisectionConfig::around(rn.value);
  cell.used_shortcut = config.risk.translation_invariant();
  for (;;) {
    if (cell.used_shortcut) {
      config.v0_mode = V0Mode::fixed;
      config.v0 = 0.0;
    } else {
      config.v0_mode = V0Mode::interval;
      config.v_a = bcfg.v_a;
      config.v_b = bcfg.v_b;
    }
    cell.task = make_task(setup, config);
    TrainConfig long_cfg = config;
    long_cfg.side = hedging::HedgeSide::long_side;
    long_cfg.seeds.init += 1;
    long_cfg.seeds.shuffle += 1;
    TrainConfig short_cfg = config;
    short_cfg.side = hedging::HedgeSide::short_side;
    cell.long_net = train_on(long_cfg, data.train, cell.task, on_epoch);
    cell.short_net = train_on(short_cfg, data.train, cell.task, on_epoch);

    auto risks = [&](double v) {
      return side_risks(cell.long_net.net, cell.short_net.net, v, data.test, cell.task, config.risk);
    };
    if (cell.used_shortcut) {
      const SideRisks at0 = risks(0.0);
      cell.solution = ErpSolution{};
      cell.solution.c0_star = erp_convex_shortcut(config.risk, at0.eps_short, at0.eps_long,
                                                  setup.grid.bond(setup.grid.n_periods));
      // The nets see the raw portfolio value, so risks at C0* come from the
      // V0 = 0 risks by translation rather than by re-running the policies.
      const double bond_n = setup.grid.bond(setup.grid.n_periods);
      cell.solution.eps_short = at0.eps_short - bond_n * cell.solution.c0_star;
      cell.solution.eps_long = at0.eps_long + bond_n * cell.solution.c0_star;
      cell.solution.at_lower = at0;
      cell.solution.at_upper = at0;
      cell.solution.status = BisectionStatus::converged;
      return cell;
    }
    cell.solution = bisect(risks, bcfg);
    if (cell.solution.status != BisectionStatus::no_root || cell.restarts >= max_restarts) return cell;
    const double width = bcfg.v_b - bcfg.v_a;
    if (cell.solution.at_upper.gap() > 0.0) {
      bcfg.v_a = bcfg.v_b;
      bcfg.v_b += width;
    } else {
      bcfg.v_b = bcfg.v_a;
      bcfg.v_a = std::max(0.0, bcfg.v_a - width);
      if (bcfg.v_a >= bcfg.v_b) return cell;
    }
    ++cell.restarts;
  }
}

struct ValidationRow {
  double v_star = 0.0;
  double interval_stat = 0.0;
  double fixed_stat = 0.0;
  [[nodiscard]] double relative_gap() const { return std::abs(interval_stat - fixed_stat) / std::abs(fixed_stat); }
};

/// Interval-trained network vs a network trained at each fixed V*, both
/// evaluated at V* on the test set.
inline std::vector<ValidationRow> validate_modified_training(const TrainConfig& interval_config,
                                                            const neural::Network& interval_net,
                                                            const std::vector<double>& v_stars,
                                                            const Datasets& data, const hedging::HedgeTask& task,
                                                            const EpochCallback& on_epoch = {}) {
  require(interval_config.v0_mode == V0Mode::interval, "validation needs an interval-mode config");
  std::vector<ValidationRow> rows;
  for (std::size_t i = 0; i < v_stars.size(); ++i) {
    const double v = v_stars[i];
    require(v >= interval_config.v_a && v <= interval_config.v_b, "V* must lie in the training interval");
    TrainConfig fixed = interval_config;
    fixed.v0_mode = V0Mode::fixed;
    fixed.v0 = v;
    fixed.seeds.init += 10 + i;
    fixed.seeds.shuffle += 10 + i;
    // Same feature normalization as the interval net so only the V0 sampling differs.
    const TrainResult fixed_net = train_on(fixed, data.train, task, on_epoch);
    const double capital = interval_config.capital(v);
    rows.push_back({v,
                    residual_risk(interval_net, capital, interval_config.side, data.test, task, interval_config.risk),
                    residual_risk(fixed_net.net, capital, interval_config.side, data.test, task, interval_config.risk)});
  }
  return rows;
}

}  // namespace erp::engine
