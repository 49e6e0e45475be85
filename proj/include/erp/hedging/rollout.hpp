#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "erp/core/errors.hpp"
#include "erp/hedging/features.hpp"
#include "erp/hedging/instruments.hpp"
#include "erp/models/path_batch.hpp"
#include "erp/neural/network.hpp"
#include "erp/pricing/black_scholes.hpp"

namespace erp::hedging {

using neural::Matrix;
using neural::Vector;

/// Everything a rollout needs besides the policy, the paths and V_0.
struct HedgeTask {
  PayoffSpec payoff;
  FeatureSpec features;
  double rate = 0.02;

  void validate() const {
    payoff.validate();
    features.validate();
    require(std::isfinite(rate), "rate must be finite");
  }
};

/// Self-financing update V_{n+1} = e^{r Delta} V_n + sum_j delta_j (S_e - e^{r Delta} S_b).
inline double portfolio_step(double value, std::span<const double> positions,
                             std::span<const double> begin_prices, std::span<const double> end_prices,
                             double growth) {
  double gain = 0.0;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    gain += positions[j] * (end_prices[j] - growth * begin_prices[j]);
  }
  return growth * value + gain;
}

struct HedgeEpisodeResult {
  std::vector<double> errors;
  std::vector<double> terminal_values;
  /// n_paths x N x D positions, filled only when requested.
  std::vector<double> positions;
  std::size_t n_assets = 0;
};

struct RolloutOptions {
  bool keep_positions = false;
  std::size_t chunk = 2048;
};

namespace detail {

inline void check_task(const models::PathBatch& batch, const HedgeTask& task) {
  task.validate();
  batch.check_consistent();
  require(batch.n_periods >= 1, "rollout needs at least one period");
  require(task.features.state_dim == batch.state_dim, "feature spec state dimension does not match the paths");
}

inline void fill_features(const FeatureSpec& spec, const models::PathBatch& batch,
                          std::span<const std::size_t> paths, std::size_t n, const Vector& values,
                          Matrix& x) {
  x.resize(static_cast<Eigen::Index>(spec.dim()), static_cast<Eigen::Index>(paths.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::size_t p = paths[i];
    write_features(spec, n, batch.stock_at(p, n), values(static_cast<Eigen::Index>(i)),
                   batch.state_at(p, n), x.col(static_cast<Eigen::Index>(i)).data());
  }
}

}  // namespace detail

/// Runs a policy over the given paths. `policy(X)` maps a (d_0 x B) feature
/// matrix to a (D x B) matrix of positions.
template <class Policy>
HedgeEpisodeResult rollout_with(Policy&& policy, const models::PathBatch& batch, double v0,
                                HedgeSide side, const HedgeTask& task, const RolloutOptions& options = {}) {
  detail::check_task(batch, task);
  require(std::isfinite(v0), "initial capital must be finite");
  require(options.chunk >= 1, "rollout chunk must be >= 1");
  const std::size_t d = batch.n_assets();
  const std::size_t periods = batch.n_periods;
  const double growth = std::exp(task.rate * batch.period_length);

  HedgeEpisodeResult out;
  out.n_assets = d;
  out.errors.resize(batch.n_paths);
  out.terminal_values.resize(batch.n_paths);
  if (options.keep_positions) out.positions.resize(batch.n_paths * periods * d);

  std::vector<std::size_t> ids;
  Matrix x;
  for (std::size_t first = 0; first < batch.n_paths; first += options.chunk) {
    const std::size_t count = std::min(options.chunk, batch.n_paths - first);
    ids.resize(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = first + i;
    Vector values = Vector::Constant(static_cast<Eigen::Index>(count), v0);
    for (std::size_t n = 0; n < periods; ++n) {
      detail::fill_features(task.features, batch, ids, n, values, x);
      const Matrix& a = policy(x);
      require(a.rows() == static_cast<Eigen::Index>(d) && a.cols() == static_cast<Eigen::Index>(count),
              "policy output must have one row per hedging instrument");
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t p = ids[i];
        double gain = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double pos = a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
          gain += pos * (batch.end_price(p, n, j) - growth * batch.begin_price(p, n, j));
          if (options.keep_positions) out.positions[(p * periods + n) * d + j] = pos;
        }
        double& v = values(static_cast<Eigen::Index>(i));
        v = growth * v + gain;
        if (!std::isfinite(v)) {
          throw NumericalError("non-finite portfolio value on path " + std::to_string(p) +
                               " at step " + std::to_string(n + 1));
        }
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t p = ids[i];
      const double vn = values(static_cast<Eigen::Index>(i));
      out.terminal_values[p] = vn;
      out.errors[p] = hedging_error(side, task.payoff(batch.terminal_stock(p)), vn);
    }
  }
  return out;
}

inline HedgeEpisodeResult rollout(const neural::Network& net, const models::PathBatch& batch, double v0,
                                  HedgeSide side, const HedgeTask& task, const RolloutOptions& options = {}) {
  require(net.input_dim() == static_cast<int>(task.features.dim()), "network input does not match the features");
  neural::ForwardTape tape;
  Matrix out;
  return rollout_with(
      [&](const Matrix& x) -> const Matrix& {
        neural::forward_recorded(net, x, tape, out);
        return out;
      },
      batch, v0, side, task, options);
}

/// Black-Scholes put delta read off the features (tau, log-moneyness); a
/// reference policy for a short put hedged with the stock.
struct BlackScholesDeltaPolicy {
  double strike = 100.0;
  double volatility = 0.2;
  double rate = 0.02;

  Matrix operator()(const Matrix& x) const {
    Matrix a(1, x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double spot = strike * std::exp(x(1, i));
      a(0, i) = pricing::bs_put_delta(spot, strike, x(0, i), volatility, rate);
    }
    return a;
  }
};

/// A recorded minibatch episode that can be differentiated with respect to
/// the network parameters. Buffers are reused across calls to `run`.
class DifferentiableEpisode {
 public:
  DifferentiableEpisode(const models::PathBatch& batch, HedgeSide side, HedgeTask task)
      : batch_(&batch), side_(side), task_(std::move(task)) {
    detail::check_task(batch, task_);
  }

  /// Forward pass over `paths` from initial capital v0; returns *this so it
  /// can be handed straight to grad_loss.
  DifferentiableEpisode& run(const neural::Network& net, std::span<const std::size_t> paths, double v0) {
    require(net.input_dim() == static_cast<int>(task_.features.dim()), "network input does not match the features");
    require(net.output_dim() == static_cast<int>(batch_->n_assets()), "network output does not match the instruments");
    require(!paths.empty(), "episode needs at least one path");
    net_ = &net;
    const auto& b = *batch_;
    const std::size_t periods = b.n_periods;
    const std::size_t d = b.n_assets();
    const auto count = static_cast<Eigen::Index>(paths.size());
    growth_ = std::exp(task_.rate * b.period_length);
    tapes_.resize(periods);
    increments_.resize(periods);
    errors_.resize(paths.size());

    Vector values = Vector::Constant(count, v0);
    Matrix x;
    Matrix a;
    for (std::size_t n = 0; n < periods; ++n) {
      detail::fill_features(task_.features, b, paths, n, values, x);
      neural::forward_recorded(net, x, tapes_[n], a);
      Matrix& inc = increments_[n];
      inc.resize(static_cast<Eigen::Index>(d), count);
      for (Eigen::Index i = 0; i < count; ++i) {
        const std::size_t p = paths[static_cast<std::size_t>(i)];
        double gain = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          inc(jj, i) = b.end_price(p, n, j) - growth_ * b.begin_price(p, n, j);
          gain += a(jj, i) * inc(jj, i);
        }
        values(i) = growth_ * values(i) + gain;
      }
      if (!values.allFinite()) throw NumericalError("non-finite portfolio value at step " + std::to_string(n + 1));
    }
    for (Eigen::Index i = 0; i < count; ++i) {
      const std::size_t p = paths[static_cast<std::size_t>(i)];
      errors_[static_cast<std::size_t>(i)] = hedging_error(side_, task_.payoff(b.terminal_stock(p)), values(i));
    }
    return *this;
  }

  [[nodiscard]] std::span<const double> errors() const { return errors_; }

  /// Accumulates d L / d theta given d L / d pi for each path of the last run.
  void backward(std::span<const double> d_errors, neural::Parameters& grad) const {
    require(net_ != nullptr, "backward called before run");
    require(d_errors.size() == errors_.size(), "d_errors size does not match the episode");
    const auto count = static_cast<Eigen::Index>(errors_.size());
    const double dv_feature = task_.features.value_derivative();
    // pi = +-Phi - V_N, so dL/dV_N = -dL/dpi.
    Vector dv(count);
    for (Eigen::Index i = 0; i < count; ++i) dv(i) = -d_errors[static_cast<std::size_t>(i)];
    Matrix d_act;
    Matrix d_input;
    for (std::size_t n = tapes_.size(); n-- > 0;) {
      d_act = increments_[n].array().rowwise() * dv.transpose().array();
      dv *= growth_;
      neural::backward(*net_, tapes_[n], d_act, grad, n > 0 ? &d_input : nullptr);
      if (n > 0) dv += dv_feature * d_input.row(FeatureSpec::kValueIndex).transpose();
    }
  }

  [[nodiscard]] const HedgeTask& task() const { return task_; }

 private:
  const models::PathBatch* batch_;
  HedgeSide side_;
  HedgeTask task_;
  const neural::Network* net_ = nullptr;
  double growth_ = 1.0;
  std::vector<neural::ForwardTape> tapes_;
  std::vector<Matrix> increments_;
  std::vector<double> errors_;
};

}  // namespace erp::hedging
