#include <algorithm>
#include <string>

#include "madrp/backtest.hpp"
#include "madrp/error.hpp"

namespace madrp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void RollingConfig::validate() const {
  if (in_sample_days < 2) throw InputError("in_sample_days must be at least 2");
  if (out_sample_days < 1) throw InputError("out_sample_days must be at least 1");
  if (rebalance_days < 1) throw InputError("rebalance_days must be at least 1");
  if (out_sample_days > rebalance_days) {
    throw InputError("out_sample_days may not exceed rebalance_days (holding periods would overlap)");
  }
  if (!(annualization_factor > 0.0)) throw InputError("annualization_factor must be positive");
}

BacktestResult run_backtest(const PriceSeries& prices, const Strategy& strategy,
                            const RollingConfig& cfg) {
  prices.validate();
  return run_backtest(returns_from_prices(prices).returns(), strategy, cfg);
}

BacktestResult run_backtest(const MatrixXd& returns, const Strategy& strategy,
                            const RollingConfig& cfg) {
  cfg.validate();
  const Index T = returns.rows();
  const Index n = returns.cols();
  const Index need = cfg.in_sample_days + cfg.out_sample_days;
  if (T < need) {
    throw InputError("backtest needs at least " + std::to_string(need + 1) + " prices (" +
                     std::to_string(need) + " returns), got " + std::to_string(T + 1) +
                     " prices");
  }

  BacktestResult res;
  res.wealth.push_back(1.0);
  std::size_t window = 0;
  for (Index k = cfg.in_sample_days; k < T; k += cfg.rebalance_days, ++window) {
    VectorXd x;
    try {
      if (strategy.method == Method::ew) {
        x = solve_ew(n).weights.values();
      } else {
        const ScenarioMatrix scn(returns.middleRows(k - cfg.in_sample_days, cfg.in_sample_days));
        x = solve(scn, strategy.method, strategy.options).weights.values();
      }
    } catch (const std::exception& e) {
      throw BacktestError("rebalance " + std::to_string(window) + " (return day " +
                              std::to_string(k) + ") failed: " + e.what(),
                          window);
    }
    res.rebalance_weights.push_back(x);
    res.rebalance_days.push_back(k);
    const Index end = std::min(k + cfg.out_sample_days, T);
    for (Index t = k; t < end; ++t) {
      const double r = returns.row(t).dot(x);
      res.oos_returns.push_back(r);
      res.wealth.push_back(res.wealth.back() * (1.0 + r));
    }
  }
  res.metrics = metric_set(res.oos_returns, res.wealth, res.rebalance_weights, cfg);
  return res;
}

}  // namespace madrp
