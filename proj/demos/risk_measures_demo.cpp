// Semi-L^p and CVaR of a heavy-tailed sample, and how each reacts to a cash shift.
#include <cstdio>
#include <vector>

#include "erp/core/rng.hpp"
#include "erp/risk/measures.hpp"

int main() {
  erp::CounterRng rng(42, 0, erp::Stream::generic);
  std::vector<double> x(10'000);
  for (double& v : x) v = rng.normal() + (rng.uniform() < 0.02 ? 5.0 : 0.0);
  std::vector<double> shifted = x;
  for (double& v : shifted) v += 1.0;

  for (const auto& spec : {erp::risk::RiskMeasureSpec::semi_lp(2.0), erp::risk::RiskMeasureSpec::semi_lp(10.0),
                           erp::risk::RiskMeasureSpec::cvar(0.95), erp::risk::RiskMeasureSpec::cvar(0.99)}) {
    const double a = erp::risk::evaluate(spec, x);
    const double b = erp::risk::evaluate(spec, shifted);
    std::printf("%-10s rho = %8.4f  rho(X+1) - rho(X) = %8.4f\n", spec.label().c_str(), a, b - a);
  }
}
