// Small end-to-end run: price an ATM put under BSM with semi-L2 and CVaR95.
#include <cstdio>

#include "erp/erp.hpp"

int main() {
  using namespace erp;
  engine::MarketSetup setup;
  setup.dynamics = models::presets::bsm();
  setup.strike = 100.0;

  engine::TrainConfig cfg;
  cfg.n_train_paths = 20'000;
  cfg.n_test_paths = 20'000;
  cfg.epochs = 5;
  const auto data = engine::simulate_datasets(setup, cfg);
  const auto rn = pricing::rn_price_put(setup.dynamics, setup.grid, setup.strike, setup.spot, 0, 0);
  std::printf("Black-Scholes price %.4f\n", rn.value);

  for (const auto& measure : {risk::RiskMeasureSpec::semi_lp(2.0), risk::RiskMeasureSpec::cvar(0.95)}) {
    cfg.risk = measure;
    const auto cell = engine::run_erp_cell(setup, data, cfg, rn);
    std::printf("%-10s C0* = %.4f (%+.1f%%) eps_S = %.4f eps_L = %.4f [%s]\n", measure.label().c_str(),
                cell.solution.c0_star, 100.0 * cell.premium(), cell.solution.eps_short, cell.solution.eps_long,
                engine::status_name(cell.solution.status));
  }
}
