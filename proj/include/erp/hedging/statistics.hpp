#pragma once

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erp/core/format.hpp"
#include "erp/hedging/rollout.hpp"
#include "erp/risk/measures.hpp"

namespace erp::hedging {

inline risk::HedgeStatistics hedging_statistics(std::span<const double> errors) {
  return risk::stats_suite(errors);
}

/// Row labels of the statistics block, in output order.
inline std::vector<std::string> statistics_rows() {
  std::vector<std::string> rows{"Mean"};
  for (double a : risk::kTailLevels) rows.push_back("CVaR_" + format_sig6(a));
  for (double a : risk::kTailLevels) rows.push_back("VaR_" + format_sig6(a));
  rows.emplace_back("SMSE");
  rows.emplace_back("MSE");
  return rows;
}

inline std::vector<double> statistics_values(const risk::HedgeStatistics& s) {
  std::vector<double> v{s.mean};
  v.insert(v.end(), s.cvar.begin(), s.cvar.end());
  v.insert(v.end(), s.var.begin(), s.var.end());
  v.push_back(s.smse);
  v.push_back(s.mse);
  return v;
}

/// One row per statistic, one column per named policy.
inline void write_statistics_csv(std::ostream& out,
                                 const std::vector<std::pair<std::string, risk::HedgeStatistics>>& columns) {
  out << "statistic";
  for (const auto& [name, stats] : columns) out << ',' << name;
  out << '\n';
  const auto rows = statistics_rows();
  std::vector<std::vector<double>> values;
  for (const auto& column : columns) values.push_back(statistics_values(column.second));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r];
    for (const auto& v : values) out << ',' << format_sig6(v[r]);
    out << '\n';
  }
}

inline void write_episode_csv(std::ostream& out, const HedgeEpisodeResult& result) {
  out << "path_id,hedging_error,terminal_value\n";
  for (std::size_t p = 0; p < result.errors.size(); ++p) {
    out << p << ',' << format_sig6(result.errors[p]) << ',' << format_sig6(result.terminal_values[p]) << '\n';
  }
}

}  // namespace erp::hedging
