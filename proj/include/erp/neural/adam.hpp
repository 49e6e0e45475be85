#pragma once

#include <cmath>
#include <cstdint>

#include "erp/core/errors.hpp"
#include "erp/neural/network.hpp"

namespace erp::neural {

/// Adam with bias-corrected moments. beta1/beta2/epsilon use the common
/// defaults; only the learning rate is an experiment hyperparameter.
struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::int64_t step = 0;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Network& net, double learning_rate = 5e-4) {
    AdamState s;
    s.first_moment = Parameters::zeros_like(net.params);
    s.second_moment = Parameters::zeros_like(net.params);
    s.learning_rate = learning_rate;
    return s;
  }
};

inline void adam_step(AdamState& state, Network& net, const Parameters& gradient) {
  require(gradient.size() == net.params.size() && state.first_moment.size() == net.params.size(),
          "adam_step: gradient and optimizer shapes must match the network");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
      theta.array() -= state.learning_rate * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + state.epsilon);
    };
    update(net.params.weights[l], gradient.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l]);
    update(net.params.biases[l], gradient.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l]);
  }
}

}  // namespace erp::neural
