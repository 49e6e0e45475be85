#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "erp/core/rng.hpp"
#include "erp/risk/measures.hpp"
#include "support/oracles.hpp"

using namespace erp;
using namespace erp::risk;

namespace {

std::vector<double> random_sample(std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed, n, Stream::generic);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal() * 3.0 + (rng.uniform() < 0.1 ? 4.0 : 0.0);
  return x;
}

}  // namespace

TEST(Cvar, SpecExamples) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_DOUBLE_EQ(var_hat(x, 0.9), 9.0);
  EXPECT_DOUBLE_EQ(cvar_hat(x, 0.9), 10.0);
  EXPECT_NEAR(cvar_hat(x, 0.5), 8.0, 1e-14);
  const std::vector<double> constant(7, 2.5);
  EXPECT_DOUBLE_EQ(cvar_hat(constant, 0.95), 2.5);
}

TEST(Cvar, AlphaTimesNOnAnIntegerBoundary) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  // 0.95 * 1000 is 950 up to rounding; the 950th order statistic is 949.
  EXPECT_DOUBLE_EQ(var_hat(x, 0.95), 949.0);
  EXPECT_DOUBLE_EQ(var_hat(x, 0.999), 998.0);
}

TEST(Cvar, MatchesSortedOracleOnRandomSamples) {
  CounterRng sizes(99, 0, Stream::generic);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + sizes.below(500);
    const auto x = random_sample(static_cast<std::uint64_t>(trial), n);
    for (double alpha : {0.5, 0.9, 0.95, 0.99, 0.999}) {
      EXPECT_NEAR(var_hat(x, alpha), oracle::sorted_var(x, alpha), 1e-12);
      EXPECT_NEAR(cvar_hat(x, alpha), oracle::sorted_cvar(x, alpha), 1e-12 * std::max(1.0, std::abs(cvar_hat(x, alpha))));
    }
  }
}

TEST(SemiLp, MatchesDirectEvaluation) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_sample(1000 + static_cast<std::uint64_t>(trial), 1 + static_cast<std::size_t>(trial));
    for (double p : {0.5, 1.0, 2.0, 6.0, 10.0}) {
      const double expected = oracle::direct_semi_lp(x, p);
      EXPECT_NEAR(semi_lp(x, p), expected, 1e-12 * std::max(1.0, expected));
    }
  }
}

TEST(SemiLp, SpecExamples) {
  EXPECT_NEAR(semi_lp(std::vector<double>{-1.0, 1.0, 3.0}, 2.0), std::sqrt(10.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(semi_lp(std::vector<double>{-1.0, -2.0}, 2.0), 0.0);
  // Large p stays finite.
  EXPECT_NEAR(semi_lp(std::vector<double>{1e3, 2e3}, 100.0), 2e3 * std::pow(0.5, 0.01), 1e-9);
}

TEST(RiskMeasures, TranslationEquivarianceOfCvarOnly) {
  const auto x = random_sample(5, 300);
  std::vector<double> shifted = x;
  for (double& v : shifted) v += 1.7;
  EXPECT_NEAR(cvar_hat(shifted, 0.95), cvar_hat(x, 0.95) + 1.7, 1e-12);
  // Stored counterexample: X = {-1, 1}, c = 1. semi-L2(X) = sqrt(1/2) but
  // semi-L2(X + 1) = sqrt(4/2) = sqrt(2) != sqrt(1/2) + 1.
  const std::vector<double> ce{-1.0, 1.0};
  const std::vector<double> ce_shift{0.0, 2.0};
  EXPECT_NEAR(semi_lp(ce, 2.0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(semi_lp(ce_shift, 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_GT(std::abs(semi_lp(ce_shift, 2.0) - (semi_lp(ce, 2.0) + 1.0)), 0.29);
}

TEST(RiskMeasures, MonotoneAndPositivelyHomogeneous) {
  const auto x = random_sample(8, 200);
  std::vector<double> bigger = x;
  std::vector<double> scaled = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    bigger[i] += (i % 3 == 0) ? 0.5 : 0.0;
    scaled[i] *= 2.5;
  }
  for (const auto& spec : {RiskMeasureSpec::semi_lp(2), RiskMeasureSpec::semi_lp(10), RiskMeasureSpec::cvar(0.9)}) {
    EXPECT_GE(evaluate(spec, bigger), evaluate(spec, x));
    EXPECT_NEAR(evaluate(spec, scaled), 2.5 * evaluate(spec, x), 1e-12 * std::abs(evaluate(spec, scaled)));
  }
}

TEST(RiskMeasures, GradientMatchesFiniteDifferences) {
  // Continuous draws: no ties, so the CVaR subgradient is a gradient.
  const auto x = random_sample(12, 40);
  for (const auto& spec : {RiskMeasureSpec::semi_lp(2), RiskMeasureSpec::semi_lp(10), RiskMeasureSpec::cvar(0.9)}) {
    std::vector<double> grad(x.size());
    const double value = evaluate_with_gradient(spec, x, grad);
    EXPECT_NEAR(value, evaluate(spec, x), 1e-14 * std::max(1.0, std::abs(value)));
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto f = [&](double v) {
        std::vector<double> y = x;
        y[i] = v;
        return evaluate(spec, y);
      };
      EXPECT_NEAR(grad[i], oracle::central_difference(f, x[i], 1e-6), 1e-6) << spec.label() << " i=" << i;
    }
  }
}

TEST(RiskMeasures, CvarSubgradientSumsToOne) {
  const std::vector<double> ties{1, 2, 2, 2, 3};
  std::vector<double> grad(ties.size());
  evaluate_with_gradient(RiskMeasureSpec::cvar(0.5), ties, grad);
  double total = 0.0;
  for (double g : grad) total += g;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(RiskMeasures, ValidationAndErrors) {
  EXPECT_THROW(RiskMeasureSpec::cvar(1.0).validate(), ValidationError);
  EXPECT_THROW(RiskMeasureSpec::cvar(0.0).validate(), ValidationError);
  EXPECT_THROW(RiskMeasureSpec::semi_lp(0.0).validate(), ValidationError);
  EXPECT_TRUE(RiskMeasureSpec::semi_lp(0.5).concave_power());
  EXPECT_THROW(semi_lp(std::vector<double>{}, 2.0), ValidationError);
  EXPECT_THROW(cvar_hat(std::vector<double>{}, 0.9), ValidationError);
}

TEST(RiskMeasures, LabelsRoundTrip) {
  for (const auto& spec : {RiskMeasureSpec::semi_lp(2), RiskMeasureSpec::semi_lp(10), RiskMeasureSpec::cvar(0.95),
                           RiskMeasureSpec::cvar(0.999)}) {
    const auto parsed = parse_risk_measure(spec.label());
    EXPECT_EQ(parsed.kind, spec.kind);
    EXPECT_EQ(parsed.label(), spec.label());
  }
  EXPECT_EQ(parse_risk_measure("L6").p, 6.0);
  EXPECT_EQ(parse_risk_measure("CVaR_0.9").alpha, 0.9);
  EXPECT_THROW(parse_risk_measure("VaR0.9"), ValidationError);
  EXPECT_THROW(parse_risk_measure("CVaRx"), ValidationError);
}

TEST(StatsSuite, HandComputedSample) {
  const std::vector<double> x{-2, -1, 0, 1, 2};
  const auto s = stats_suite(x);
  EXPECT_DOUBLE_EQ(s.mean, 0.0);
  EXPECT_DOUBLE_EQ(s.mse, 2.0);
  EXPECT_DOUBLE_EQ(s.smse, 1.0);
  EXPECT_DOUBLE_EQ(s.var[0], 2.0);
  EXPECT_DOUBLE_EQ(s.cvar[0], 2.0);
}
