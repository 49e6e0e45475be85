#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "erp/neural/adam.hpp"
#include "erp/neural/checkpoint.hpp"
#include "erp/neural/network.hpp"
#include "support/oracles.hpp"

using namespace erp;
using namespace erp::neural;

TEST(Network, GlorotBoundsAndZeroBiases) {
  const auto net = glorot_init({5, 56, 56, 1}, 4);
  net.validate();
  EXPECT_EQ(net.params.size(), 5u * 56 + 56 + 56 * 56 + 56 + 56 + 1);
  for (std::size_t l = 0; l < net.n_affine(); ++l) {
    const double a = std::sqrt(6.0 / (net.dims[l] + net.dims[l + 1]));
    EXPECT_LE(net.params.weights[l].cwiseAbs().maxCoeff(), a);
    EXPECT_GT(net.params.weights[l].cwiseAbs().maxCoeff(), 0.5 * a);
    EXPECT_TRUE(net.params.biases[l].isZero());
  }
  EXPECT_EQ(glorot_init({5, 56, 56, 1}, 4).params.flatten(), net.params.flatten());
  EXPECT_NE(glorot_init({5, 56, 56, 1}, 5).params.flatten(), net.params.flatten());
}

TEST(Network, HandComputedForward) {
  Network net = glorot_init({2, 2, 1}, 0);
  net.params.weights[0] << 1.0, -1.0, 0.5, 2.0;
  net.params.biases[0] << 0.0, -1.0;
  net.params.weights[1] << 3.0, -2.0;
  net.params.biases[1] << 0.25;
  // x = (1, 2): z1 = (-1, 3.5) -> relu (0, 3.5); out = -7 + 0.25.
  const std::vector<double> x{1.0, 2.0};
  EXPECT_DOUBLE_EQ(forward(net, x)(0), -6.75);
  Matrix batch(2, 2);
  batch << 1.0, 3.0, 2.0, 0.0;
  const Matrix out = forward_batch(net, batch);
  EXPECT_DOUBLE_EQ(out(0, 0), -6.75);
  // x = (3, 0): z1 = (3, 0.5) -> out = 9 - 1 + 0.25.
  EXPECT_DOUBLE_EQ(out(0, 1), 8.25);
}

TEST(Network, RejectsWrongInputDimension) {
  const auto net = glorot_init({3, 4, 1}, 0);
  EXPECT_THROW(forward(net, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST(Network, BackwardMatchesFiniteDifferences) {
  Network net = glorot_init({4, 7, 6, 2}, 11);
  for (auto& b : net.params.biases) b.setConstant(0.05);
  Matrix x(4, 300);
  CounterRng rng(1, 0, Stream::generic);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Matrix w(2, 300);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  auto loss = [&](const Network& n) { return (forward_batch(n, x).array() * w.array()).sum(); };

  ForwardTape tape;
  Matrix out;
  forward_recorded(net, x, tape, out);
  auto grad = Parameters::zeros_like(net.params);
  Matrix dx;
  backward(net, tape, w, grad, &dx);
  const auto flat = grad.flatten();
  for (std::size_t k = 0; k < flat.size(); k += 7) {
    auto f = [&](double v) {
      Network copy = net;
      copy.params.at(k) = v;
      return loss(copy);
    };
    EXPECT_NEAR(flat[k], oracle::central_difference(f, net.params.at(k), 1e-6), 1e-5 * std::max(1.0, std::abs(flat[k])));
  }
  auto fx = [&](double v) {
    Matrix saved = x;
    x(1, 5) = v;
    const double r = loss(net);
    x = saved;
    return r;
  };
  EXPECT_NEAR(dx(1, 5), oracle::central_difference(fx, x(1, 5), 1e-6), 1e-6);
}

TEST(Network, BlockedAndSingleColumnPassesAgree) {
  const auto net = glorot_init({5, 56, 56, 2}, 3);
  Matrix x = Matrix::Random(5, 700);
  const Matrix all = forward_batch(net, x);
  for (Eigen::Index c : {0, 255, 256, 699}) {
    const Matrix one = forward_batch(net, x.col(c));
    EXPECT_NEAR((one - all.col(c)).cwiseAbs().maxCoeff(), 0.0, 1e-13);
  }
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  Network net = glorot_init({1, 1}, 0);
  net.params.weights[0](0, 0) = 1.0;
  net.params.biases[0](0) = -1.0;
  auto state = AdamState::for_network(net, 0.1);
  auto grad = Parameters::zeros_like(net.params);
  grad.weights[0](0, 0) = 3.0;
  grad.biases[0](0) = -0.5;
  adam_step(state, net, grad);
  // m_hat = g, v_hat = g^2 after bias correction, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(net.params.weights[0](0, 0), 1.0 - 0.1 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(net.params.biases[0](0), -1.0 + 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, MinimizesAQuadratic) {
  Network net = glorot_init({1, 1}, 0);
  net.params.weights[0](0, 0) = 5.0;
  net.params.biases[0](0) = -3.0;
  auto state = AdamState::for_network(net, 0.05);
  for (int i = 0; i < 2000; ++i) {
    auto grad = Parameters::zeros_like(net.params);
    grad.weights[0](0, 0) = 2.0 * (net.params.weights[0](0, 0) - 1.0);
    grad.biases[0](0) = 2.0 * (net.params.biases[0](0) - 2.0);
    adam_step(state, net, grad);
  }
  EXPECT_NEAR(net.params.weights[0](0, 0), 1.0, 1e-3);
  EXPECT_NEAR(net.params.biases[0](0), 2.0, 1e-3);
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto net = glorot_init({5, 56, 56, 2}, 8);
  std::stringstream ss;
  write_checkpoint(ss, net);
  const auto back = read_checkpoint(ss);
  EXPECT_EQ(back.dims, net.dims);
  EXPECT_EQ(back.params.flatten(), net.params.flatten());
}

TEST(Checkpoint, RejectsBadMagicAndTruncation) {
  std::stringstream bad("NOTANET!xxxxxxxxxxxx");
  EXPECT_THROW(read_checkpoint(bad), ValidationError);
  const auto net = glorot_init({3, 4, 1}, 8);
  std::stringstream ss;
  write_checkpoint(ss, net);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 5);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_checkpoint(cut), ValidationError);
}
