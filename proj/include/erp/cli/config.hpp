#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "erp/core/errors.hpp"
#include "erp/core/rng.hpp"
#include "erp/engine/bisection.hpp"
#include "erp/engine/pipeline.hpp"
#include "erp/engine/train.hpp"
#include "erp/models/params.hpp"
#include "erp/risk/measures.hpp"

namespace erp::cli {

using json = nlohmann::ordered_json;

/// Everything a subcommand needs, fully resolved (no implicit defaults are
/// left once a config has been loaded, so the manifest can replay a run).
struct ExperimentConfig {
  std::string preset = "desk-scale";
  std::string model = "rs";
  models::Dynamics dynamics = models::presets::regime_switching();
  models::TimeGrid grid;
  double spot = 100.0;
  std::vector<double> strikes{90.0, 100.0, 110.0};
  std::string instruments = "stock";
  models::IVParams implied_vol = models::presets::implied_vol();
  std::vector<risk::RiskMeasureSpec> risk_measures{risk::RiskMeasureSpec::semi_lp(2.0)};
  engine::TrainConfig train = engine::TrainConfig::desk_scale();
  engine::BisectionConfig bisection;
  /// When false the bisection interval is [0.75, 1.5] x the risk-neutral price.
  bool bisection_interval_set = false;
  std::size_t n_mc = 1'000'000;
  std::uint64_t pricing_seed = 5005;
  // simulate
  std::size_t n_paths = 1000;
  std::string measure = "P";
  // train / hedge-stats / erp
  double v0 = 0.0;
  std::string checkpoint;
  std::string long_checkpoint;
  std::string short_checkpoint;
  // validate
  std::vector<double> v_stars{4.343, 2.503, 4.005};

  [[nodiscard]] hedging::InstrumentKind instrument_kind() const {
    return instruments == "options" ? hedging::InstrumentKind::atm_option_pair
                                    : hedging::InstrumentKind::stock_only;
  }

  [[nodiscard]] engine::MarketSetup market(double strike) const {
    engine::MarketSetup s;
    s.dynamics = dynamics;
    s.grid = grid;
    s.spot = spot;
    s.strike = strike;
    s.instruments = instrument_kind();
    s.implied_vol = implied_vol;
    return s;
  }

  [[nodiscard]] std::optional<engine::BisectionConfig> bisection_override() const {
    if (bisection_interval_set) return bisection;
    return std::nullopt;
  }

  void validate() const {
    require(preset == "desk-scale" || preset == "paper-full", "preset must be desk-scale or paper-full");
    models::validate(dynamics);
    grid.validate();
    require(spot > 0.0, "spot must be > 0");
    require(!strikes.empty(), "strikes must not be empty");
    for (double k : strikes) require(k > 0.0, "strikes must be > 0");
    require(instruments == "stock" || instruments == "options", "instruments must be stock or options");
    if (instruments == "options") implied_vol.validate();
    require(!risk_measures.empty(), "risk_measures must not be empty");
    for (const auto& r : risk_measures) r.validate();
    train.validate();
    require(bisection.zeta > 0.0 && bisection.max_iter >= 1, "bisection needs zeta > 0 and max_iter >= 1");
    if (bisection_interval_set) bisection.validate();
    require(measure == "P" || measure == "Q", "measure must be P or Q");
    require(n_paths >= 1, "n_paths must be >= 1");
  }
};

namespace detail {

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

inline const char* side_key(hedging::HedgeSide s) { return s == hedging::HedgeSide::long_side ? "long" : "short"; }

inline hedging::HedgeSide parse_side(const std::string& s) {
  require(s == "long" || s == "short", "train.side must be long or short");
  return s == "long" ? hedging::HedgeSide::long_side : hedging::HedgeSide::short_side;
}

}  // namespace detail

inline json dynamics_to_json(const std::string& model, const models::Dynamics& d) {
  json j;
  j["model"] = model;
  switch (d.index()) {
    case 0: {
      const auto& p = std::get<models::BSMParams>(d);
      j["mu"] = p.mu;
      j["sigma"] = p.sigma;
      break;
    }
    case 1: {
      const auto& p = std::get<models::GarchParams>(d);
      j["mu"] = p.mu;
      j["omega"] = p.omega;
      j["upsilon"] = p.upsilon;
      j["gamma"] = p.gamma;
      j["beta"] = p.beta;
      if (p.sigma1_sq) j["sigma1_sq"] = *p.sigma1_sq;
      break;
    }
    case 2: {
      const auto& p = std::get<models::RSParams>(d);
      j["mu"] = detail::to_vector(p.mu);
      j["sigma"] = detail::to_vector(p.sigma);
      json rows = json::array();
      for (Eigen::Index i = 0; i < p.transition.rows(); ++i) {
        rows.push_back(detail::to_vector(p.transition.row(i).transpose()));
      }
      j["transition"] = rows;
      if (p.xi0.size() > 0) j["xi0"] = detail::to_vector(p.xi0);
      break;
    }
    default: {
      const auto& p = std::get<models::MJDParams>(d);
      j["nu"] = p.nu;
      j["sigma"] = p.sigma;
      j["lambda"] = p.lambda;
      j["mu_jump"] = p.mu_jump;
      j["sigma_jump"] = p.sigma_jump;
    }
  }
  return j;
}

/// Preset parameters for `model`, overridden by any fields present in `j`.
inline models::Dynamics dynamics_from_json(const std::string& model, const json& j) {
  if (model == "bsm") {
    auto p = models::presets::bsm();
    detail::read(j, "mu", p.mu);
    detail::read(j, "sigma", p.sigma);
    return p;
  }
  if (model == "garch") {
    auto p = models::presets::garch();
    detail::read(j, "mu", p.mu);
    detail::read(j, "omega", p.omega);
    detail::read(j, "upsilon", p.upsilon);
    detail::read(j, "gamma", p.gamma);
    detail::read(j, "beta", p.beta);
    if (j.contains("sigma1_sq")) p.sigma1_sq = j.at("sigma1_sq").get<double>();
    return p;
  }
  if (model == "rs") {
    auto p = models::presets::regime_switching();
    std::vector<double> v;
    if (j.contains("mu")) {
      detail::read(j, "mu", v);
      p.mu = detail::to_eigen(v);
    }
    if (j.contains("sigma")) {
      detail::read(j, "sigma", v);
      p.sigma = detail::to_eigen(v);
    }
    if (j.contains("transition")) {
      std::vector<std::vector<double>> rows;
      detail::read(j, "transition", rows);
      p.transition.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == rows[0].size(), "dynamics.transition rows must have equal length");
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
          p.transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
      }
    }
    if (j.contains("xi0")) {
      detail::read(j, "xi0", v);
      p.xi0 = detail::to_eigen(v);
    }
    return p;
  }
  if (model == "mjd" || model == "mjd-long") {
    auto p = model == "mjd" ? models::presets::mjd() : models::presets::mjd_long();
    detail::read(j, "nu", p.nu);
    detail::read(j, "sigma", p.sigma);
    detail::read(j, "lambda", p.lambda);
    detail::read(j, "mu_jump", p.mu_jump);
    detail::read(j, "sigma_jump", p.sigma_jump);
    return p;
  }
  throw ValidationError("dynamics.model must be one of bsm, garch, rs, mjd, mjd-long (got '" + model + "')");
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["dynamics"] = dynamics_to_json(c.model, c.dynamics);
  j["grid"] = {{"n_periods", c.grid.n_periods},
               {"days_per_period", c.grid.days_per_period},
               {"days_per_year", c.grid.days_per_year},
               {"rate", c.grid.rate}};
  j["spot"] = c.spot;
  j["strikes"] = c.strikes;
  j["instruments"] = c.instruments;
  j["implied_vol"] = {{"kappa", c.implied_vol.kappa},
                      {"theta", c.implied_vol.theta},
                      {"sigma_iv", c.implied_vol.sigma_iv},
                      {"rho", c.implied_vol.rho}};
  std::vector<std::string> measures;
  for (const auto& r : c.risk_measures) measures.push_back(r.label());
  j["risk_measures"] = measures;
  const auto& t = c.train;
  j["train"] = {{"n_train_paths", t.n_train_paths},
                {"n_test_paths", t.n_test_paths},
                {"minibatch", t.minibatch},
                {"epochs", t.epochs},
                {"learning_rate", t.learning_rate},
                {"risk", t.risk.label()},
                {"side", detail::side_key(t.side)},
                {"v0_mode", t.v0_mode == engine::V0Mode::fixed ? "fixed" : "interval"},
                {"v0", t.v0},
                {"v_a", t.v_a},
                {"v_b", t.v_b},
                {"seeds",
                 {{"train_sim", t.seeds.train_sim},
                  {"test_sim", t.seeds.test_sim},
                  {"init", t.seeds.init},
                  {"shuffle", t.seeds.shuffle}}}};
  j["bisection"] = {{"zeta", c.bisection.zeta}, {"max_iter", c.bisection.max_iter}};
  if (c.bisection_interval_set) {
    j["bisection"]["v_a"] = c.bisection.v_a;
    j["bisection"]["v_b"] = c.bisection.v_b;
  }
  j["pricing"] = {{"n_mc", c.n_mc}, {"seed", c.pricing_seed}};
  j["n_paths"] = c.n_paths;
  j["measure"] = c.measure;
  j["v0"] = c.v0;
  j["checkpoint"] = c.checkpoint;
  j["long_checkpoint"] = c.long_checkpoint;
  j["short_checkpoint"] = c.short_checkpoint;
  j["v_stars"] = c.v_stars;
  return j;
}

/// Training hyperparameters of a named preset.
inline engine::TrainConfig preset_train(const std::string& preset) {
  if (preset == "paper-full") return engine::TrainConfig::paper_full();
  require(preset == "desk-scale", "unknown preset '" + preset + "' (expected desk-scale or paper-full)");
  return engine::TrainConfig::desk_scale();
}

/// Builds a config from JSON. `preset_override` (from --preset) takes
/// precedence over the file's "preset" key; explicit train fields override
/// the preset's values.
inline ExperimentConfig from_json(const json& j, const std::string& preset_override = "") {
  require(j.is_object(), "config root must be a JSON object");
  ExperimentConfig c;
  detail::read(j, "preset", c.preset);
  if (!preset_override.empty()) c.preset = preset_override;
  c.train = preset_train(c.preset);

  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    require(d.is_object(), "config field 'dynamics' must be an object");
    detail::read(d, "model", c.model);
    c.dynamics = dynamics_from_json(c.model, d);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::read(g, "n_periods", c.grid.n_periods);
    detail::read(g, "days_per_period", c.grid.days_per_period);
    detail::read(g, "days_per_year", c.grid.days_per_year);
    detail::read(g, "rate", c.grid.rate);
  }
  detail::read(j, "spot", c.spot);
  detail::read(j, "strikes", c.strikes);
  detail::read(j, "instruments", c.instruments);
  if (j.contains("implied_vol")) {
    const json& iv = j.at("implied_vol");
    detail::read(iv, "kappa", c.implied_vol.kappa);
    detail::read(iv, "theta", c.implied_vol.theta);
    detail::read(iv, "sigma_iv", c.implied_vol.sigma_iv);
    detail::read(iv, "rho", c.implied_vol.rho);
  }
  if (j.contains("risk_measures")) {
    std::vector<std::string> names;
    detail::read(j, "risk_measures", names);
    c.risk_measures.clear();
    for (const auto& n : names) c.risk_measures.push_back(risk::parse_risk_measure(n));
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    auto& tc = c.train;
    detail::read(t, "n_train_paths", tc.n_train_paths);
    detail::read(t, "n_test_paths", tc.n_test_paths);
    detail::read(t, "minibatch", tc.minibatch);
    detail::read(t, "epochs", tc.epochs);
    detail::read(t, "learning_rate", tc.learning_rate);
    if (t.contains("risk")) tc.risk = risk::parse_risk_measure(t.at("risk").get<std::string>());
    if (t.contains("side")) tc.side = detail::parse_side(t.at("side").get<std::string>());
    if (t.contains("v0_mode")) {
      const auto mode = t.at("v0_mode").get<std::string>();
      require(mode == "fixed" || mode == "interval", "train.v0_mode must be fixed or interval");
      tc.v0_mode = mode == "fixed" ? engine::V0Mode::fixed : engine::V0Mode::interval;
    }
    detail::read(t, "v0", tc.v0);
    detail::read(t, "v_a", tc.v_a);
    detail::read(t, "v_b", tc.v_b);
    if (t.contains("seeds")) {
      const json& s = t.at("seeds");
      detail::read(s, "train_sim", tc.seeds.train_sim);
      detail::read(s, "test_sim", tc.seeds.test_sim);
      detail::read(s, "init", tc.seeds.init);
      detail::read(s, "shuffle", tc.seeds.shuffle);
    }
  }
  if (j.contains("bisection")) {
    const json& b = j.at("bisection");
    detail::read(b, "zeta", c.bisection.zeta);
    detail::read(b, "max_iter", c.bisection.max_iter);
    if (b.contains("v_a") || b.contains("v_b")) {
      require(b.contains("v_a") && b.contains("v_b"), "bisection.v_a and bisection.v_b must be given together");
      detail::read(b, "v_a", c.bisection.v_a);
      detail::read(b, "v_b", c.bisection.v_b);
      c.bisection_interval_set = true;
    }
  }
  if (j.contains("pricing")) {
    detail::read(j.at("pricing"), "n_mc", c.n_mc);
    detail::read(j.at("pricing"), "seed", c.pricing_seed);
  }
  detail::read(j, "n_paths", c.n_paths);
  detail::read(j, "measure", c.measure);
  detail::read(j, "v0", c.v0);
  detail::read(j, "checkpoint", c.checkpoint);
  detail::read(j, "long_checkpoint", c.long_checkpoint);
  detail::read(j, "short_checkpoint", c.short_checkpoint);
  detail::read(j, "v_stars", c.v_stars);
  c.validate();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& preset_override = "") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j, preset_override);
}

inline ExperimentConfig load_config(const std::string& path, const std::string& preset_override = "") {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), preset_override);
}

/// Derives every stage seed from one master seed.
inline void apply_master_seed(ExperimentConfig& c, std::uint64_t seed) {
  auto derive = [&](std::uint64_t k) { return erp::detail::mix64(seed * erp::detail::kGolden + k) >> 1; };
  c.train.seeds = {derive(1), derive(2), derive(3), derive(4)};
  c.pricing_seed = derive(5);
}

}  // namespace erp::cli
