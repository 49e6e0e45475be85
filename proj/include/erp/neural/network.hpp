#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "erp/core/errors.hpp"
#include "erp/core/rng.hpp"

namespace erp::neural {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weights and biases of every affine layer; also used for gradients and
/// optimizer moments, which share the same shapes.
struct Parameters {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  [[nodiscard]] static Parameters zeros_like(const Parameters& other) {
    Parameters z;
    for (const auto& w : other.weights) z.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : other.biases) z.biases.push_back(Vector::Zero(b.size()));
    return z;
  }

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
  }

  [[nodiscard]] std::size_t size() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  /// Visits every parameter block as (pointer, length) in canonical order:
  /// W_1, b_1, W_2, b_2, ... (weights in Eigen's column-major storage).
  template <class F>
  void for_each_block(F&& f) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      f(weights[l].data(), static_cast<std::size_t>(weights[l].size()));
      f(biases[l].data(), static_cast<std::size_t>(biases[l].size()));
    }
  }

  template <class F>
  void for_each_block(F&& f) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      f(weights[l].data(), static_cast<std::size_t>(weights[l].size()));
      f(biases[l].data(), static_cast<std::size_t>(biases[l].size()));
    }
  }

  /// Flat copy in canonical order.
  [[nodiscard]] std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for_each_block([&](const double* p, std::size_t n) { out.insert(out.end(), p, p + n); });
    return out;
  }

  /// Mutable reference to the k-th parameter in canonical order.
  double& at(std::size_t k) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const auto nw = static_cast<std::size_t>(weights[l].size());
      if (k < nw) return weights[l].data()[k];
      k -= nw;
      const auto nb = static_cast<std::size_t>(biases[l].size());
      if (k < nb) return biases[l].data()[k];
      k -= nb;
    }
    throw ValidationError("parameter index out of range");
  }

  [[nodiscard]] bool all_finite() const {
    bool ok = true;
    for_each_block([&](const double* p, std::size_t n) {
      for (std::size_t i = 0; i < n && ok; ++i) ok = std::isfinite(p[i]);
    });
    return ok;
  }
};

/// Feedforward policy x -> o(h_L(...h_1(x))) with ReLU hidden layers and an
/// affine output layer. dims = {d_0, d_1, ..., d_{L+1}}.
struct Network {
  std::vector<int> dims;
  Parameters params;

  [[nodiscard]] int input_dim() const { return dims.front(); }
  [[nodiscard]] int output_dim() const { return dims.back(); }
  [[nodiscard]] std::size_t n_affine() const { return params.weights.size(); }

  void validate() const {
    require(dims.size() >= 2, "network needs at least input and output dimensions");
    require(params.weights.size() == dims.size() - 1 && params.biases.size() == dims.size() - 1,
            "network layer count does not match dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      require(dims[l] >= 1 && dims[l + 1] >= 1, "network dimensions must be >= 1");
      require(params.weights[l].rows() == dims[l + 1] && params.weights[l].cols() == dims[l],
              "weight matrix shape does not match dims");
      require(params.biases[l].size() == dims[l + 1], "bias shape does not match dims");
    }
  }
};

/// Default policy architecture: two hidden layers of 56 units.
inline std::vector<int> policy_dims(int input_dim, int output_dim) {
  return {input_dim, 56, 56, output_dim};
}

/// Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); zero biases.
inline Network glorot_init(std::span<const int> dims, std::uint64_t seed) {
  Network net;
  net.dims.assign(dims.begin(), dims.end());
  require(net.dims.size() >= 2, "network needs at least input and output dimensions");
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    const int fan_in = net.dims[l];
    const int fan_out = net.dims[l + 1];
    require(fan_in >= 1 && fan_out >= 1, "network dimensions must be >= 1");
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    CounterRng rng(seed, l, Stream::init);
    Matrix w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    net.params.weights.push_back(std::move(w));
    net.params.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

inline Network glorot_init(std::initializer_list<int> dims, std::uint64_t seed) {
  return glorot_init(std::span<const int>(dims.begin(), dims.size()), seed);
}


/// Activations recorded by one batched forward pass: the inputs and the
/// post-ReLU output of every hidden layer. ReLU'(z) is read back as h > 0,
/// which sets the subgradient at z = 0 to 0.
struct ForwardTape {
  Matrix input;
  std::vector<Matrix> hidden;
};

/// Forward pass that records the tape; writes the network output to `out`.
inline void forward_recorded(const Network& net, const Matrix& inputs, ForwardTape& tape, Matrix& out) {
  require(inputs.rows() == net.input_dim(), "forward: input dimension mismatch");
  constexpr Eigen::Index kBlock = 256;
  const std::size_t n_hidden = net.n_affine() - 1;
  const Eigen::Index cols = inputs.cols();
  tape.input = inputs;
  tape.hidden.resize(n_hidden);
  for (std::size_t l = 0; l < n_hidden; ++l) tape.hidden[l].resize(net.dims[l + 1], cols);
  out.resize(net.output_dim(), cols);
  for (Eigen::Index c0 = 0; c0 < cols; c0 += kBlock) {
    const Eigen::Index w = std::min(kBlock, cols - c0);
    for (std::size_t l = 0; l < n_hidden; ++l) {
      const auto below = (l == 0 ? tape.input : tape.hidden[l - 1]).middleCols(c0, w);
      auto z = tape.hidden[l].middleCols(c0, w);
      z.noalias() = net.params.weights[l] * below;
      z = (z.colwise() + net.params.biases[l]).cwiseMax(0.0);
    }
    const auto top = (n_hidden == 0 ? tape.input : tape.hidden[n_hidden - 1]).middleCols(c0, w);
    auto o = out.middleCols(c0, w);
    o.noalias() = net.params.weights[n_hidden] * top;
    o.colwise() += net.params.biases[n_hidden];
  }
}

/// Batched evaluation; each column of `inputs` is one feature vector.
inline Matrix forward_batch(const Network& net, const Matrix& inputs) {
  ForwardTape tape;
  Matrix out;
  forward_recorded(net, inputs, tape, out);
  return out;
}

inline Vector forward(const Network& net, std::span<const double> x) {
  require(static_cast<int>(x.size()) == net.input_dim(), "forward: input dimension mismatch");
  const Matrix in = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  return forward_batch(net, in).col(0);
}

/// Reverse pass through one recorded forward pass. Accumulates parameter
/// gradients into `grad` and, when requested, writes d loss / d inputs.
/// Samples are processed in column blocks so the working set stays in cache.
inline void backward(const Network& net, const ForwardTape& tape, const Matrix& d_out,
                     Parameters& grad, Matrix* d_input) {
  constexpr Eigen::Index kBlock = 256;
  const std::size_t n_hidden = net.n_affine() - 1;
  const Eigen::Index cols = d_out.cols();
  if (d_input != nullptr) d_input->resize(net.input_dim(), cols);
  Matrix delta;
  Matrix back;
  for (Eigen::Index c0 = 0; c0 < cols; c0 += kBlock) {
    const Eigen::Index w = std::min(kBlock, cols - c0);
    delta = d_out.middleCols(c0, w);
    for (std::size_t l = n_hidden + 1; l-- > 0;) {
      const auto below = (l == 0 ? tape.input : tape.hidden[l - 1]).middleCols(c0, w);
      grad.weights[l].noalias() += delta * below.transpose();
      grad.biases[l] += delta.rowwise().sum();
      if (l == 0) {
        if (d_input != nullptr) d_input->middleCols(c0, w).noalias() = net.params.weights[0].transpose() * delta;
        break;
      }
      back.noalias() = net.params.weights[l].transpose() * delta;
      delta = (below.array() > 0.0).select(back, 0.0);
    }
  }
}

}  // namespace erp::neural
