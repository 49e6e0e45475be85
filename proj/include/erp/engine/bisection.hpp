#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "erp/core/errors.hpp"
#include "erp/risk/measures.hpp"

namespace erp::engine {

struct BisectionConfig {
  double zeta = 0.01;
  int max_iter = 100;
  double v_a = 0.0;
  double v_b = 1.0;

  /// Default search interval [0.75 C, 1.5 C] around the risk-neutral price.
  static BisectionConfig around(double rn_price) {
    BisectionConfig c;
    c.v_a = 0.75 * rn_price;
    c.v_b = 1.5 * rn_price;
    return c;
  }

  void validate() const {
    require(zeta > 0.0 && std::isfinite(zeta), "bisection zeta must be > 0");
    require(max_iter >= 1, "bisection max_iter must be >= 1");
    require(std::isfinite(v_a) && std::isfinite(v_b) && v_a < v_b, "bisection needs V_A < V_B");
  }
};

enum class BisectionStatus { converged, max_iter, no_root };

inline const char* status_name(BisectionStatus s) {
  switch (s) {
    case BisectionStatus::converged: return "converged";
    case BisectionStatus::max_iter: return "max_iter";
    default: return "no_root";
  }
}

/// Risks of both sides at a candidate price V.
struct SideRisks {
  double eps_short = 0.0;  // eps_S(V)
  double eps_long = 0.0;   // eps_L(-V)
  [[nodiscard]] double gap() const { return eps_short - eps_long; }
};

struct BisectionStep {
  double lower = 0.0;
  double upper = 0.0;
  double v = 0.0;
  double gap = 0.0;
};

struct ErpSolution {
  double c0_star = std::numeric_limits<double>::quiet_NaN();
  double eps_long = std::numeric_limits<double>::quiet_NaN();
  double eps_short = std::numeric_limits<double>::quiet_NaN();
  SideRisks at_lower;
  SideRisks at_upper;
  std::vector<BisectionStep> trace;
  BisectionStatus status = BisectionStatus::no_root;

  [[nodiscard]] bool converged() const { return status == BisectionStatus::converged; }
};

/// Bisection on Delta(V) = eps_S(V) - eps_L(-V). The endpoint signs are
/// checked first; each step keeps the half whose endpoints still bracket a
/// sign change, which for a decreasing Delta is "Delta > 0 => V_A <- V".
template <class Risks>
ErpSolution bisect(Risks&& risks, const BisectionConfig& cfg) {
  cfg.validate();
  ErpSolution sol;
  sol.at_lower = risks(cfg.v_a);
  sol.at_upper = risks(cfg.v_b);
  const double g_lo = sol.at_lower.gap();
  const double g_hi = sol.at_upper.gap();
  if (!std::isfinite(g_lo) || !std::isfinite(g_hi)) throw NumericalError("non-finite risk gap at the bisection endpoints");
  if ((g_lo > 0.0 && g_hi > 0.0) || (g_lo < 0.0 && g_hi < 0.0)) {
    sol.status = BisectionStatus::no_root;
    return sol;
  }
  const bool lower_positive = g_lo > 0.0 || (g_lo == 0.0 && g_hi < 0.0);
  double lo = cfg.v_a;
  double hi = cfg.v_b;
  sol.status = BisectionStatus::max_iter;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double v = 0.5 * (lo + hi);
    const SideRisks r = risks(v);
    const double g = r.gap();
    if (!std::isfinite(g)) throw NumericalError("non-finite risk gap at V = " + std::to_string(v));
    sol.trace.push_back({lo, hi, v, g});
    sol.c0_star = v;
    sol.eps_short = r.eps_short;
    sol.eps_long = r.eps_long;
    if (std::abs(g) <= cfg.zeta) {
      sol.status = BisectionStatus::converged;
      break;
    }
    if ((g > 0.0) == lower_positive) {
      lo = v;
    } else {
      hi = v;
    }
  }
  return sol;
}

/// C0* = B_N (eps_S(0) - eps_L(0)) / 2; valid only for translation-invariant measures.
inline double erp_convex_shortcut(const risk::RiskMeasureSpec& spec, double eps_short_at_0,
                                  double eps_long_at_0, double bond_n) {
  require(spec.translation_invariant(),
          "the convex shortcut needs a translation-invariant risk measure; " + spec.label() + " is not");
  require(bond_n > 0.0 && std::isfinite(bond_n), "bond value B_N must be > 0");
  return 0.5 * bond_n * (eps_short_at_0 - eps_long_at_0);
}

struct GapScan {
  std::vector<double> v;
  std::vector<double> gap;
  bool nonincreasing = true;
};

/// Evaluates Delta(V) on an evenly spaced grid and flags any increase.
template <class Risks>
GapScan scan_gap(Risks&& risks, double v_a, double v_b, int points = 10) {
  require(points >= 2 && v_a < v_b, "gap scan needs >= 2 points on a proper interval");
  GapScan scan;
  for (int i = 0; i < points; ++i) {
    const double v = v_a + (v_b - v_a) * i / (points - 1);
    scan.v.push_back(v);
    scan.gap.push_back(risks(v).gap());
    if (i > 0 && scan.gap[i] > scan.gap[i - 1]) scan.nonincreasing = false;
  }
  return scan;
}

}  // namespace erp::engine
