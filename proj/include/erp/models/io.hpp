#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "erp/core/errors.hpp"
#include "erp/models/path_batch.hpp"

namespace erp::models {

// Binary layout (little-endian host order):
//   char[8]   magic "ERPPATH1"
//   uint64    n_paths, n_periods, n_assets, state_dim
//   double    period_length
//   double[]  stock        n_paths x (N+1)
//   double[]  log_returns  n_paths x N
//   double[]  state        n_paths x N x state_dim
//   double[]  asset_begin  n_paths x N x n_assets
//   double[]  asset_end    n_paths x N x n_assets
// All arrays are row-major. Stock-only batches store the stock as asset 0.
inline constexpr std::array<char, 8> kPathMagic{'E', 'R', 'P', 'P', 'A', 'T', 'H', '1'};

namespace detail {

inline void write_doubles(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_doubles(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  require(static_cast<bool>(in), "path file truncated");
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  require(static_cast<bool>(in), "path file truncated");
  return v;
}

}  // namespace detail

inline void write_binary(std::ostream& out, const PathBatch& batch) {
  batch.check_consistent();
  out.write(kPathMagic.data(), kPathMagic.size());
  detail::write_u64(out, batch.n_paths);
  detail::write_u64(out, batch.n_periods);
  detail::write_u64(out, batch.n_assets());
  detail::write_u64(out, batch.state_dim);
  detail::write_doubles(out, &batch.period_length, 1);
  detail::write_doubles(out, batch.stock.data(), batch.stock.size());
  detail::write_doubles(out, batch.log_returns.data(), batch.log_returns.size());
  detail::write_doubles(out, batch.state.data(), batch.state.size());
  if (batch.stock_only()) {
    std::vector<double> begin(batch.n_paths * batch.n_periods);
    std::vector<double> end(begin.size());
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
      for (std::size_t n = 0; n < batch.n_periods; ++n) {
        begin[p * batch.n_periods + n] = batch.stock_at(p, n);
        end[p * batch.n_periods + n] = batch.stock_at(p, n + 1);
      }
    }
    detail::write_doubles(out, begin.data(), begin.size());
    detail::write_doubles(out, end.data(), end.size());
  } else {
    detail::write_doubles(out, batch.asset_begin.data(), batch.asset_begin.size());
    detail::write_doubles(out, batch.asset_end.data(), batch.asset_end.size());
  }
  require(static_cast<bool>(out), "failed to write path batch");
}

inline PathBatch read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  require(static_cast<bool>(in) && magic == kPathMagic, "not a path batch file (bad magic)");
  PathBatch batch;
  batch.n_paths = detail::read_u64(in);
  batch.n_periods = detail::read_u64(in);
  const std::uint64_t n_assets = detail::read_u64(in);
  batch.state_dim = detail::read_u64(in);
  require(n_assets >= 1 && batch.n_paths >= 1 && batch.n_periods >= 1, "path file header is invalid");
  detail::read_doubles(in, &batch.period_length, 1);
  batch.stock.resize(batch.n_paths * (batch.n_periods + 1));
  batch.log_returns.resize(batch.n_paths * batch.n_periods);
  batch.state.resize(batch.n_paths * batch.n_periods * batch.state_dim);
  detail::read_doubles(in, batch.stock.data(), batch.stock.size());
  detail::read_doubles(in, batch.log_returns.data(), batch.log_returns.size());
  detail::read_doubles(in, batch.state.data(), batch.state.size());
  std::vector<double> begin(batch.n_paths * batch.n_periods * n_assets);
  std::vector<double> end(begin.size());
  detail::read_doubles(in, begin.data(), begin.size());
  detail::read_doubles(in, end.data(), end.size());
  if (n_assets == 1) {
    // Stock-only: instrument prices are the stock itself.
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
      for (std::size_t n = 0; n < batch.n_periods; ++n) {
        require(begin[p * batch.n_periods + n] == batch.stock_at(p, n) &&
                    end[p * batch.n_periods + n] == batch.stock_at(p, n + 1),
                "single-asset path file must trade the stock");
      }
    }
  } else {
    batch.option_assets = n_assets;
    batch.asset_begin = std::move(begin);
    batch.asset_end = std::move(end);
  }
  return batch;
}

inline void save_binary(const std::string& path, const PathBatch& batch) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path + " for writing");
  write_binary(out, batch);
}

inline PathBatch load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  return read_binary(in);
}

/// One row per (path, period): path,period,y,S_b,S_e,state_*,asset_b_*,asset_e_*.
inline void write_csv(std::ostream& out, const PathBatch& batch) {
  out << "path,period,y,S_b,S_e";
  for (std::size_t k = 0; k < batch.state_dim; ++k) out << ",state_" << k;
  if (!batch.stock_only()) {
    for (std::size_t j = 0; j < batch.n_assets(); ++j) out << ",asset_b_" << j;
    for (std::size_t j = 0; j < batch.n_assets(); ++j) out << ",asset_e_" << j;
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t p = 0; p < batch.n_paths; ++p) {
    for (std::size_t n = 0; n < batch.n_periods; ++n) {
      out << p << ',' << n << ',' << batch.log_return(p, n) << ',' << batch.stock_at(p, n) << ','
          << batch.stock_at(p, n + 1);
      for (double s : batch.state_at(p, n)) out << ',' << s;
      if (!batch.stock_only()) {
        for (std::size_t j = 0; j < batch.n_assets(); ++j) out << ',' << batch.begin_price(p, n, j);
        for (std::size_t j = 0; j < batch.n_assets(); ++j) out << ',' << batch.end_price(p, n, j);
      }
      out << '\n';
    }
  }
}

}  // namespace erp::models
