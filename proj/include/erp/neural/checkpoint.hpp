#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "erp/core/errors.hpp"
#include "erp/neural/network.hpp"

namespace erp::neural {

// Checkpoint layout:
//   char[8]  "ERPNET\0\0"
//   uint32   format version (1)
//   uint32   number of dims (L + 2)
//   int32[]  d_0 .. d_{L+1}
//   double[] per affine layer: W_l row-major (d_l x d_{l-1}), then b_l
inline constexpr std::array<char, 8> kNetMagic{'E', 'R', 'P', 'N', 'E', 'T', '\0', '\0'};
inline constexpr std::uint32_t kNetVersion = 1;

inline void write_checkpoint(std::ostream& out, const Network& net) {
  net.validate();
  out.write(kNetMagic.data(), kNetMagic.size());
  const std::uint32_t version = kNetVersion;
  const auto count = static_cast<std::uint32_t>(net.dims.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (int d : net.dims) {
    const auto v = static_cast<std::int32_t>(d);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  for (std::size_t l = 0; l < net.n_affine(); ++l) {
    const Matrix& w = net.params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double v = w(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
    const Vector& b = net.params.biases[l];
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
  }
  require(static_cast<bool>(out), "failed to write network checkpoint");
}

inline Network read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  require(static_cast<bool>(in) && magic == kNetMagic, "not a network checkpoint (bad magic)");
  std::uint32_t version = 0;
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  require(static_cast<bool>(in) && version == kNetVersion,
          "unsupported checkpoint version " + std::to_string(version));
  require(count >= 2 && count < 64, "checkpoint has an invalid layer count");
  Network net;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::int32_t d = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    require(static_cast<bool>(in) && d >= 1 && d < (1 << 20), "checkpoint has an invalid dimension");
    net.dims.push_back(d);
  }
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    Matrix w(net.dims[l + 1], net.dims[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) in.read(reinterpret_cast<char*>(&w(i, j)), sizeof(double));
    }
    Vector b(net.dims[l + 1]);
    in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
    require(static_cast<bool>(in), "checkpoint truncated");
    net.params.weights.push_back(std::move(w));
    net.params.biases.push_back(std::move(b));
  }
  return net;
}

inline void save_checkpoint(const std::string& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path + " for writing");
  write_checkpoint(out, net);
}

inline Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace erp::neural
