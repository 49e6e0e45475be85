#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erp/core/errors.hpp"
#include "erp/core/rng.hpp"
#include "erp/hedging/rollout.hpp"
#include "erp/neural/adam.hpp"
#include "erp/neural/grad_loss.hpp"
#include "erp/neural/network.hpp"
#include "erp/risk/measures.hpp"

namespace erp::engine {

enum class V0Mode { fixed, interval };

struct TrainSeeds {
  std::uint64_t train_sim = 1001;
  std::uint64_t test_sim = 2002;
  std::uint64_t init = 3003;
  std::uint64_t shuffle = 4004;
};

/// Training hyperparameters. V0 values are prices: the short side starts
/// from +V, the long side from -V.
struct TrainConfig {
  std::size_t n_train_paths = 100'000;
  std::size_t n_test_paths = 100'000;
  std::size_t minibatch = 1000;
  int epochs = 20;
  double learning_rate = 5e-4;
  risk::RiskMeasureSpec risk = risk::RiskMeasureSpec::semi_lp(2.0);
  hedging::HedgeSide side = hedging::HedgeSide::short_side;
  V0Mode v0_mode = V0Mode::interval;
  double v0 = 0.0;
  double v_a = 0.0;
  double v_b = 1.0;
  TrainSeeds seeds;

  /// 10^5 training paths, 20 epochs.
  static TrainConfig desk_scale() { return {}; }
  /// 400k training paths, 100k test paths, 100 epochs.
  static TrainConfig paper_full() {
    TrainConfig c;
    c.n_train_paths = 400'000;
    c.epochs = 100;
    return c;
  }

  void validate() const {
    risk.validate();
    require(n_train_paths >= 1 && n_test_paths >= 1, "path counts must be >= 1");
    require(minibatch >= 1, "minibatch size must be >= 1");
    require(epochs >= 0, "epochs must be >= 0");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning rate must be > 0");
    if (v0_mode == V0Mode::interval) {
      require(std::isfinite(v_a) && std::isfinite(v_b) && v_a < v_b, "interval training needs V_A < V_B");
    } else {
      require(std::isfinite(v0), "fixed V0 must be finite");
    }
  }

  /// Initial capital for a price V on this side.
  [[nodiscard]] double capital(double price) const {
    return side == hedging::HedgeSide::short_side ? price : -price;
  }

  /// Scale used to normalize the portfolio-value feature.
  [[nodiscard]] double value_scale() const {
    const double mid = v0_mode == V0Mode::interval ? 0.5 * (v_a + v_b) : v0;
    return std::abs(mid) > 0.0 ? std::abs(mid) : 1.0;
  }
};

struct TrainResult {
  neural::Network net;
  std::vector<double> epoch_losses;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// SGD over a prepared training batch. Each epoch shuffles the path indices
/// without replacement; in interval mode every minibatch shares one
/// V ~ U(V_A, V_B).
inline TrainResult train_on(const TrainConfig& config, const models::PathBatch& train_batch,
                            const hedging::HedgeTask& task, const EpochCallback& on_epoch = {}) {
  config.validate();
  require(train_batch.n_paths >= 1, "empty training batch");
  const auto d0 = static_cast<int>(task.features.dim());
  const auto out_dim = static_cast<int>(train_batch.n_assets());
  TrainResult result;
  result.net = neural::glorot_init(neural::policy_dims(d0, out_dim), config.seeds.init);
  if (config.epochs == 0) return result;

  auto adam = neural::AdamState::for_network(result.net, config.learning_rate);
  hedging::DifferentiableEpisode episode(train_batch, config.side, task);
  std::vector<std::size_t> order(train_batch.n_paths);
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng(config.seeds.shuffle, static_cast<std::uint64_t>(epoch), Stream::shuffle)
        .shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += config.minibatch, ++step) {
      const std::size_t count = std::min(config.minibatch, order.size() - first);
      const std::span<const std::size_t> ids(order.data() + first, count);
      double price = config.v0;
      if (config.v0_mode == V0Mode::interval) {
        price = CounterRng(config.seeds.shuffle, step, Stream::v0_draw).uniform(config.v_a, config.v_b);
      }
      const double v0 = config.capital(price);
      neural::LossGradient lg;
      try {
        lg = neural::grad_loss(
            result.net, [&](const neural::Network& net) -> hedging::DifferentiableEpisode& {
              return episode.run(net, ids, v0);
            },
            config.risk);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", minibatch step " +
                             std::to_string(step) + ", shuffle seed " + std::to_string(config.seeds.shuffle) + ")");
      }
      neural::adam_step(adam, result.net, lg.gradient);
      loss_sum += lg.loss;
      ++batches;
    }
    const double mean = loss_sum / static_cast<double>(batches);
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

/// Out-of-sample residual risk rho_hat of the hedging errors from initial capital v0.
inline double residual_risk(const neural::Network& net, double v0, hedging::HedgeSide side,
                            const models::PathBatch& test_batch, const hedging::HedgeTask& task,
                            const risk::RiskMeasureSpec& spec) {
  const auto episode = hedging::rollout(net, test_batch, v0, side, task);
  return risk::evaluate(spec, episode.errors);
}

}  // namespace erp::engine
