#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "erp/cli/config.hpp"
#include "erp/core/format.hpp"
#include "erp/engine/pipeline.hpp"
#include "erp/hedging/statistics.hpp"
#include "erp/models/io.hpp"
#include "erp/neural/checkpoint.hpp"
#include "erp/pricing/risk_neutral.hpp"

namespace erp::cli {

inline constexpr const char* kEngineVersion = "1.0.0";

/// Output directory plus the list of files written, for the manifest.
struct RunContext {
  std::filesystem::path out_dir = ".";
  std::ostream* log = &std::cerr;
  std::vector<std::string> outputs;

  [[nodiscard]] std::filesystem::path path(const std::string& name) const { return out_dir / name; }

  void write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(path(name), std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + path(name).string());
    out << content;
    outputs.push_back(name);
  }

  void record(const std::string& name) { outputs.push_back(name); }
};

inline std::string moneyness(double strike, double spot) {
  if (strike < spot) return "OTM";
  if (strike > spot) return "ITM";
  return "ATM";
}

/// FNV-1a 64-bit digest of a file, used only to fingerprint outputs.
inline std::string file_digest(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  char c = 0;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_manifest(const RunContext& ctx, const std::string& command, const ExperimentConfig& config,
                           double wall_seconds) {
  json m;
  m["command"] = command;
  m["engine_version"] = kEngineVersion;
  m["config"] = to_json(config);
  m["seeds"] = {{"train_sim", config.train.seeds.train_sim},
                {"test_sim", config.train.seeds.test_sim},
                {"init", config.train.seeds.init},
                {"shuffle", config.train.seeds.shuffle},
                {"pricing", config.pricing_seed}};
  m["wall_clock_seconds"] = wall_seconds;
  json digests = json::object();
  for (const auto& name : ctx.outputs) digests[name] = file_digest(ctx.path(name));
  m["outputs"] = digests;
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream out(ctx.path("manifest.json"));
  out << m.dump(2) << '\n';
}

inline engine::EpochCallback epoch_logger(RunContext& ctx, const std::string& tag) {
  return [&ctx, tag](int epoch, double loss) {
    *ctx.log << "  [" << tag << "] epoch " << epoch + 1 << " loss " << format_sig6(loss) << '\n';
  };
}

inline pricing::RnPrice rn_price(const ExperimentConfig& c, const models::Dynamics& dynamics,
                                 const models::TimeGrid& grid, double strike) {
  return pricing::rn_price_put(dynamics, grid, strike, c.spot, c.n_mc, c.pricing_seed);
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const ExperimentConfig& c, RunContext& ctx) {
  const auto setup = c.market(c.strikes.front());
  models::PathBatch batch;
  if (c.measure == "Q") {
    batch = pricing::q_simulate(c.dynamics, c.grid, c.n_paths, c.train.seeds.train_sim, setup.simulation_options());
    if (setup.instruments == hedging::InstrumentKind::atm_option_pair) {
      batch = hedging::attach_option_pair(std::move(batch), c.grid.rate);
    }
  } else {
    batch = engine::simulate_for(setup, c.n_paths, c.train.seeds.train_sim);
  }
  models::save_binary(ctx.path("paths.bin").string(), batch);
  ctx.record("paths.bin");
  std::ostringstream csv;
  models::write_csv(csv, batch);
  ctx.write("paths.csv", csv.str());

  double sum = 0.0;
  double sum_sq = 0.0;
  const double discount = std::exp(-c.grid.rate * c.grid.maturity());
  for (std::size_t p = 0; p < batch.n_paths; ++p) {
    const double x = discount * batch.terminal_stock(p);
    sum += x;
    sum_sq += x * x;
  }
  const auto n = static_cast<double>(batch.n_paths);
  const double mean = sum / n;
  const double se = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) / n) : 0.0;
  std::ostringstream summary;
  summary << "model,measure,n_paths,n_periods,mean_discounted_terminal,std_error\n"
          << c.model << ',' << c.measure << ',' << batch.n_paths << ',' << batch.n_periods << ','
          << format_sig6(mean) << ',' << format_sig6(se) << '\n';
  ctx.write("summary.csv", summary.str());
  std::cout << summary.str();
  return 0;
}

// ---------------------------------------------------------------- price-rn

inline int cmd_price_rn(const ExperimentConfig& c, RunContext& ctx) {
  std::ostringstream csv;
  csv << "model,moneyness,strike,price,std_error,method,n_paths\n";
  for (double k : c.strikes) {
    const auto p = rn_price(c, c.dynamics, c.grid, k);
    csv << c.model << ',' << moneyness(k, c.spot) << ',' << format_sig6(k) << ',' << format_sig6(p.value) << ','
        << format_sig6(p.std_error) << ',' << pricing::method_name(p.method) << ',' << p.n_paths << '\n';
  }
  ctx.write("price_rn.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------- train

inline int cmd_train(const ExperimentConfig& c, RunContext& ctx) {
  const auto setup = c.market(c.strikes.front());
  const auto train_batch = engine::simulate_for(setup, c.train.n_train_paths, c.train.seeds.train_sim);
  const auto task = engine::make_task(setup, c.train);
  const auto result = engine::train_on(c.train, train_batch, task, epoch_logger(ctx, c.train.risk.label()));
  const std::string name = c.checkpoint.empty() ? "net.bin" : c.checkpoint;
  neural::save_checkpoint(ctx.path(name).string(), result.net);
  ctx.record(name);
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    csv << e + 1 << ',' << format_sig6(result.epoch_losses[e]) << '\n';
  }
  ctx.write("losses.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------- hedge-stats

inline int cmd_hedge_stats(const ExperimentConfig& c, RunContext& ctx) {
  const auto setup = c.market(c.strikes.front());
  const auto test = engine::simulate_for(setup, c.train.n_test_paths, c.train.seeds.test_sim);
  const auto task = engine::make_task(setup, c.train);
  neural::Network net;
  std::string policy = "unhedged";
  if (c.checkpoint.empty()) {
    net = neural::glorot_init(neural::policy_dims(static_cast<int>(task.features.dim()), static_cast<int>(test.n_assets())), 0);
    net.params.set_zero();
  } else {
    net = neural::load_checkpoint(c.checkpoint);
    policy = std::filesystem::path(c.checkpoint).filename().string();
  }
  const auto episode = hedging::rollout(net, test, c.train.capital(c.v0), c.train.side, task);
  std::ostringstream stats;
  hedging::write_statistics_csv(stats, {{policy, hedging::hedging_statistics(episode.errors)}});
  ctx.write("hedge_stats.csv", stats.str());
  std::ostringstream ep;
  hedging::write_episode_csv(ep, episode);
  ctx.write("episode.csv", ep.str());
  std::cout << stats.str();
  return 0;
}

// ---------------------------------------------------------------- erp

inline void write_solution(RunContext& ctx, const std::string& prefix, const engine::ErpCellResult& cell,
                           const std::string& label, double strike) {
  const auto& s = cell.solution;
  std::ostringstream csv;
  csv << "measure,strike,rn_price,c0_star,premium,eps_short,eps_long,status,iterations,method\n"
      << label << ',' << format_sig6(strike) << ',' << format_sig6(cell.rn.value) << ',' << format_sig6(s.c0_star)
      << ',' << format_sig6(cell.premium()) << ',' << format_sig6(s.eps_short) << ',' << format_sig6(s.eps_long)
      << ',' << engine::status_name(s.status) << ',' << s.trace.size() << ','
      << (cell.used_shortcut ? "shortcut" : "bisection") << '\n';
  ctx.write(prefix + ".csv", csv.str());
  std::ostringstream trace;
  trace << "iteration,lower,upper,v,gap\n";
  for (std::size_t i = 0; i < s.trace.size(); ++i) {
    const auto& t = s.trace[i];
    trace << i + 1 << ',' << format_sig6(t.lower) << ',' << format_sig6(t.upper) << ',' << format_sig6(t.v) << ','
          << format_sig6(t.gap) << '\n';
  }
  ctx.write(prefix + "_trace.csv", trace.str());
}

inline int cmd_erp(const ExperimentConfig& c, RunContext& ctx) {
  const double strike = c.strikes.front();
  const auto setup = c.market(strike);
  engine::TrainConfig cfg = c.train;
  cfg.risk = c.risk_measures.front();
  const auto rn = rn_price(c, c.dynamics, c.grid, strike);
  *ctx.log << "risk-neutral price " << format_sig6(rn.value) << '\n';
  engine::ErpCellResult cell;
  if (!c.long_checkpoint.empty() && !c.short_checkpoint.empty()) {
    const auto test = engine::simulate_for(setup, cfg.n_test_paths, cfg.seeds.test_sim);
    const auto bcfg = c.bisection_override() ? *c.bisection_override() : engine::BisectionConfig::around(rn.value);
    cfg.v0_mode = cfg.risk.translation_invariant() ? engine::V0Mode::fixed : engine::V0Mode::interval;
    cfg.v0 = 0.0;
    cfg.v_a = bcfg.v_a;
    cfg.v_b = bcfg.v_b;
    cell.rn = rn;
    cell.task = engine::make_task(setup, cfg);
    cell.long_net.net = neural::load_checkpoint(c.long_checkpoint);
    cell.short_net.net = neural::load_checkpoint(c.short_checkpoint);
    auto risks = [&](double v) {
      return engine::side_risks(cell.long_net.net, cell.short_net.net, v, test, cell.task, cfg.risk);
    };
    cell.used_shortcut = cfg.risk.translation_invariant();
    if (cell.used_shortcut) {
      const auto at0 = risks(0.0);
      const double bond_n = c.grid.bond(c.grid.n_periods);
      cell.solution.c0_star = engine::erp_convex_shortcut(cfg.risk, at0.eps_short, at0.eps_long, bond_n);
      cell.solution.eps_short = at0.eps_short - bond_n * cell.solution.c0_star;
      cell.solution.eps_long = at0.eps_long + bond_n * cell.solution.c0_star;
      cell.solution.at_lower = at0;
      cell.solution.at_upper = at0;
      cell.solution.status = engine::BisectionStatus::converged;
    } else {
      cell.solution = engine::bisect(risks, bcfg);
    }
  } else {
    const auto data = engine::simulate_datasets(setup, cfg);
    cell = engine::run_erp_cell(setup, data, cfg, rn, c.bisection_override(), epoch_logger(ctx, cfg.risk.label()));
    neural::save_checkpoint(ctx.path("long.bin").string(), cell.long_net.net);
    neural::save_checkpoint(ctx.path("short.bin").string(), cell.short_net.net);
    ctx.record("long.bin");
    ctx.record("short.bin");
  }
  write_solution(ctx, "erp", cell, cfg.risk.label(), strike);
  char line[2][160];
  std::snprintf(line[0], sizeof line[0], "%-12s %10s %10s %10s %10s %10s  %s\n", "measure", "C0^Q", "C0*", "premium",
                "eps_S", "eps_L", "status");
  std::snprintf(line[1], sizeof line[1], "%-12s %10.4f %10.4f %9.1f%% %10.4f %10.4f  %s\n", cfg.risk.label().c_str(),
                rn.value, cell.solution.c0_star, 100.0 * cell.premium(), cell.solution.eps_short,
                cell.solution.eps_long, engine::status_name(cell.solution.status));
  std::cout << line[0] << line[1];
  if (cell.solution.status == engine::BisectionStatus::no_root) {
    throw NumericalError("no root of the risk gap in the bisection interval (gap " +
                         format_sig6(cell.solution.at_lower.gap()) + " at V_A, " +
                         format_sig6(cell.solution.at_upper.gap()) + " at V_B); restart with a wider interval");
  }
  return 0;
}

// ---------------------------------------------------------------- tables

/// Equal risk prices for every strike x measure on shared train/test sets.
struct PriceGrid {
  std::vector<pricing::RnPrice> rn;
  std::vector<std::vector<engine::ErpCellResult>> cells;  // [strike][measure]
};

inline PriceGrid price_grid(const ExperimentConfig& c, const models::Dynamics& dynamics, const models::TimeGrid& grid,
                            hedging::InstrumentKind instruments, RunContext& ctx) {
  ExperimentConfig local = c;
  local.dynamics = dynamics;
  local.grid = grid;
  PriceGrid out;
  auto base = local.market(c.strikes.front());
  base.instruments = instruments;
  const auto data = engine::simulate_datasets(base, c.train);
  for (double k : c.strikes) {
    auto setup = base;
    setup.strike = k;
    out.rn.push_back(rn_price(c, dynamics, grid, k));
    out.cells.emplace_back();
    for (const auto& measure : c.risk_measures) {
      engine::TrainConfig cfg = c.train;
      cfg.risk = measure;
      *ctx.log << moneyness(k, c.spot) << ' ' << measure.label() << '\n';
      auto cell = engine::run_erp_cell(setup, data, cfg, out.rn.back(), c.bisection_override(),
                                       epoch_logger(ctx, measure.label()));
      *ctx.log << "  C0* = " << format_sig6(cell.solution.c0_star) << " (" << engine::status_name(cell.solution.status)
               << ")\n";
      out.cells.back().push_back(std::move(cell));
    }
  }
  return out;
}

inline std::string cell_detail_header() {
  return "setup,moneyness,strike,rn_price,measure,c0_star,premium,eps_short,eps_long,status,iterations,method\n";
}

inline void cell_detail_rows(std::ostream& out, const std::string& setup_name, const ExperimentConfig& c,
                             const PriceGrid& g) {
  for (std::size_t i = 0; i < c.strikes.size(); ++i) {
    for (std::size_t m = 0; m < c.risk_measures.size(); ++m) {
      const auto& cell = g.cells[i][m];
      out << setup_name << ',' << moneyness(c.strikes[i], c.spot) << ',' << format_sig6(c.strikes[i]) << ','
          << format_sig6(g.rn[i].value) << ',' << c.risk_measures[m].label() << ','
          << format_sig6(cell.solution.c0_star) << ',' << format_sig6(cell.premium()) << ','
          << format_sig6(cell.solution.eps_short) << ',' << format_sig6(cell.solution.eps_long) << ','
          << engine::status_name(cell.solution.status) << ',' << cell.solution.trace.size() << ','
          << (cell.used_shortcut ? "shortcut" : "bisection") << '\n';
    }
  }
}

inline int cmd_table1(const ExperimentConfig& c, RunContext& ctx) {
  const auto g = price_grid(c, c.dynamics, c.grid, c.instrument_kind(), ctx);
  std::ostringstream csv;
  csv << "moneyness,strike,rn_price";
  for (const auto& m : c.risk_measures) csv << ',' << m.label();
  csv << '\n';
  for (std::size_t i = 0; i < c.strikes.size(); ++i) {
    csv << moneyness(c.strikes[i], c.spot) << ',' << format_sig6(c.strikes[i]) << ',' << format_sig6(g.rn[i].value);
    for (const auto& cell : g.cells[i]) csv << ',' << format_sig6(cell.premium());
    csv << '\n';
  }
  ctx.write("table1.csv", csv.str());
  std::ostringstream detail;
  detail << cell_detail_header();
  cell_detail_rows(detail, c.model, c, g);
  ctx.write("table1_detail.csv", detail.str());
  std::cout << csv.str();
  return 0;
}

/// Short-side policies trained at V0 = C0^Q under each measure, compared on one test set.
inline int cmd_table2(const ExperimentConfig& c, RunContext& ctx) {
  const double strike = c.strikes.front();
  const auto setup = c.market(strike);
  const auto rn = rn_price(c, c.dynamics, c.grid, strike);
  const auto data = engine::simulate_datasets(setup, c.train);
  std::vector<std::pair<std::string, risk::HedgeStatistics>> columns;
  for (const auto& measure : c.risk_measures) {
    engine::TrainConfig cfg = c.train;
    cfg.risk = measure;
    cfg.side = hedging::HedgeSide::short_side;
    cfg.v0_mode = engine::V0Mode::fixed;
    cfg.v0 = rn.value;
    const auto task = engine::make_task(setup, cfg);
    const auto net = engine::train_on(cfg, data.train, task, epoch_logger(ctx, measure.label()));
    const auto episode = hedging::rollout(net.net, data.test, rn.value, hedging::HedgeSide::short_side, task);
    columns.emplace_back(measure.label(), hedging::hedging_statistics(episode.errors));
  }
  std::ostringstream raw;
  hedging::write_statistics_csv(raw, columns);
  ctx.write("table2.csv", raw.str());
  std::ostringstream rel;
  rel << "statistic," << columns.front().first;
  for (std::size_t k = 1; k < columns.size(); ++k) rel << ',' << columns[k].first << "_rel";
  rel << '\n';
  const auto rows = hedging::statistics_rows();
  const auto base = hedging::statistics_values(columns.front().second);
  std::vector<std::vector<double>> vals;
  for (const auto& col : columns) vals.push_back(hedging::statistics_values(col.second));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rel << rows[r] << ',' << format_sig6(base[r]);
    for (std::size_t k = 1; k < vals.size(); ++k) rel << ',' << format_sig6(vals[k][r] / base[r] - 1.0);
    rel << '\n';
  }
  ctx.write("table2_relative.csv", rel.str());
  std::cout << "V0 = " << format_sig6(rn.value) << '\n' << rel.str();
  return 0;
}

inline int cmd_table3(const ExperimentConfig& c, RunContext& ctx) {
  const std::vector<std::pair<std::string, models::Dynamics>> models_list{
      {"bsm", models::presets::bsm()}, {"mjd", models::presets::mjd()}, {"garch", models::presets::garch()}};
  std::ostringstream detail;
  detail << cell_detail_header();
  for (const auto& [name, dyn] : models_list) {
    *ctx.log << "== " << name << '\n';
    const auto g = price_grid(c, dyn, c.grid, hedging::InstrumentKind::stock_only, ctx);
    cell_detail_rows(detail, name, c, g);
  }
  ctx.write("table3.csv", detail.str());
  std::cout << detail.str();
  return 0;
}

/// One-year puts under the long-horizon jump-diffusion with stock or
/// short-dated ATM option hedges.
inline int cmd_table4(const ExperimentConfig& c, RunContext& ctx) {
  struct HedgeSetup {
    const char* name;
    int n_periods;
    int days_per_period;
    hedging::InstrumentKind instruments;
  };
  const std::vector<HedgeSetup> setups{{"daily-stock", 252, 1, hedging::InstrumentKind::stock_only},
                                       {"monthly-stock", 12, 21, hedging::InstrumentKind::stock_only},
                                       {"1m-options", 12, 21, hedging::InstrumentKind::atm_option_pair},
                                       {"3m-options", 4, 63, hedging::InstrumentKind::atm_option_pair}};
  const models::Dynamics dyn = c.model == "mjd-long" ? c.dynamics : models::Dynamics(models::presets::mjd_long());
  std::ostringstream detail;
  detail << cell_detail_header();
  for (const auto& s : setups) {
    models::TimeGrid grid{s.n_periods, s.days_per_period, 252, 0.03};
    *ctx.log << "== " << s.name << '\n';
    const auto g = price_grid(c, dyn, grid, s.instruments, ctx);
    cell_detail_rows(detail, s.name, c, g);
  }
  ctx.write("table4.csv", detail.str());
  std::cout << detail.str();
  return 0;
}

// ---------------------------------------------------------------- validate

inline int cmd_validate(const ExperimentConfig& c, RunContext& ctx) {
  const double strike = c.strikes.front();
  const auto setup = c.market(strike);
  const auto rn = rn_price(c, c.dynamics, c.grid, strike);
  const auto bcfg = c.bisection_override() ? *c.bisection_override() : engine::BisectionConfig::around(rn.value);
  const auto data = engine::simulate_datasets(setup, c.train);
  std::ostringstream csv;
  csv << "measure,v_star,interval_net,fixed_net,relative_gap\n";
  for (const auto& measure : c.risk_measures) {
    require(!measure.translation_invariant(), "validate runs the semi-L^p protocol; got " + measure.label());
    engine::TrainConfig cfg = c.train;
    cfg.risk = measure;
    cfg.v0_mode = engine::V0Mode::interval;
    cfg.v_a = bcfg.v_a;
    cfg.v_b = bcfg.v_b;
    const auto task = engine::make_task(setup, cfg);
    const auto interval_net = engine::train_on(cfg, data.train, task, epoch_logger(ctx, measure.label()));
    const auto rows = engine::validate_modified_training(cfg, interval_net.net, c.v_stars, data, task,
                                                         epoch_logger(ctx, measure.label() + " fixed"));
    for (const auto& r : rows) {
      csv << measure.label() << ',' << format_sig6(r.v_star) << ',' << format_sig6(r.interval_stat) << ','
          << format_sig6(r.fixed_stat) << ',' << format_sig6(r.relative_gap()) << '\n';
    }
  }
  ctx.write("validate.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

inline int dispatch(const std::string& command, const ExperimentConfig& c, RunContext& ctx) {
  static const std::map<std::string, int (*)(const ExperimentConfig&, RunContext&)> table{
      {"simulate", cmd_simulate}, {"price-rn", cmd_price_rn}, {"train", cmd_train},
      {"erp", cmd_erp},           {"hedge-stats", cmd_hedge_stats}, {"table1", cmd_table1},
      {"table2", cmd_table2},     {"table3", cmd_table3},     {"table4", cmd_table4},
      {"validate", cmd_validate}};
  const auto it = table.find(command);
  require(it != table.end(), "unknown command '" + command + "'");
  std::filesystem::create_directories(ctx.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = it->second(c, ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(ctx, command, c, wall);
  return rc;
}

}  // namespace erp::cli
