#pragma once

#include <span>
#include <string>
#include <vector>

#include "erp/core/errors.hpp"
#include "erp/neural/network.hpp"
#include "erp/risk/measures.hpp"

namespace erp::neural {

struct LossGradient {
  double loss = 0.0;
  Parameters gradient;
};

/// Reverse-mode gradient of rho_hat(rollout errors) with respect to the
/// network parameters.
///
/// `rollout(net)` must return an episode exposing `errors()` (the terminal
/// hedging errors of the minibatch) and `backward(d_errors, grad)`, which
/// propagates d loss / d errors back through the recorded episode and
/// accumulates into `grad`.
template <class Rollout>
LossGradient grad_loss(const Network& net, Rollout&& rollout, const risk::RiskMeasureSpec& spec) {
  auto&& episode = rollout(net);
  const std::span<const double> errors = episode.errors();
  std::vector<double> d_errors(errors.size());
  LossGradient out;
  out.loss = risk::evaluate_with_gradient(spec, errors, d_errors);
  if (!std::isfinite(out.loss)) {
    throw NumericalError("non-finite loss " + std::to_string(out.loss) + " under " + spec.label());
  }
  out.gradient = Parameters::zeros_like(net.params);
  episode.backward(d_errors, out.gradient);
  if (!out.gradient.all_finite()) throw NumericalError("non-finite gradient under " + spec.label());
  return out;
}

}  // namespace erp::neural
