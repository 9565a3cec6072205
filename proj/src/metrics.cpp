#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "madrp/backtest.hpp"
#include "madrp/error.hpp"

namespace madrp {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double r : v) ss += (r - m) * (r - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

void require_nonempty(std::span<const double> v, const char* what) {
  if (v.empty()) throw InputError(std::string(what) + " needs a nonempty series");
}

// Mean of the k largest values.
double upper_tail_mean(std::vector<double> v, std::size_t k) {
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(),
                    std::greater<>());
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
         static_cast<double>(k);
}

}  // namespace

std::vector<double> drawdowns(std::span<const double> wealth) {
  require_nonempty(wealth, "drawdown");
  std::vector<double> dd;
  double peak = wealth[0];
  for (std::size_t t = 1; t < wealth.size(); ++t) {
    peak = std::max(peak, wealth[t]);
    dd.push_back((wealth[t] - peak) / peak);
  }
  return dd;
}

double max_drawdown(std::span<const double> wealth) {
  const std::vector<double> dd = drawdowns(wealth);
  double worst = 0.0;
  for (double d : dd) worst = std::min(worst, d);
  return worst;
}

double ulcer_index(std::span<const double> wealth) {
  const std::vector<double> dd = drawdowns(wealth);
  if (dd.empty()) return 0.0;
  double ss = 0.0;
  for (double d : dd) ss += d * d;
  return std::sqrt(ss / static_cast<double>(dd.size()));
}

double sharpe_ratio(double mean_annual, double std_annual, double risk_free) {
  return (mean_annual - risk_free) / std_annual;
}

std::optional<double> sharpe(std::span<const double> returns, const RollingConfig& cfg) {
  require_nonempty(returns, "sharpe");
  const double sd = population_std(returns) * std::sqrt(cfg.annualization_factor);
  if (!(sd > 0.0)) return std::nullopt;
  return sharpe_ratio(mean_of(returns) * cfg.annualization_factor, sd, cfg.risk_free);
}

double target_downside_deviation(std::span<const double> returns, double threshold) {
  require_nonempty(returns, "target downside deviation");
  double ss = 0.0;
  for (double r : returns) {
    const double d = std::min(r - threshold, 0.0);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(returns.size()));
}

std::optional<double> sortino(std::span<const double> returns, const RollingConfig& cfg) {
  const double daily_rf = cfg.risk_free / cfg.annualization_factor;
  const double tdd = target_downside_deviation(returns, daily_rf) *
                     std::sqrt(cfg.annualization_factor);
  if (!(tdd > 0.0)) return std::nullopt;
  return (mean_of(returns) * cfg.annualization_factor - cfg.risk_free) / tdd;
}

double turnover(std::span<const Eigen::VectorXd> weights) {
  if (weights.size() < 2) throw InputError("turnover needs at least two weight vectors");
  double total = 0.0;
  for (std::size_t q = 1; q < weights.size(); ++q) {
    if (weights[q].size() != weights[q - 1].size()) {
      throw InputError("turnover weight vectors differ in length");
    }
    total += (weights[q] - weights[q - 1]).lpNorm<1>();
  }
  return total / static_cast<double>(weights.size() - 1);
}

std::optional<double> rachev(std::span<const double> returns, double alpha,
                             const RollingConfig& cfg) {
  require_nonempty(returns, "rachev");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("rachev tail level must be in (0, 1]");
  const double n = static_cast<double>(returns.size());
  const auto k = static_cast<std::size_t>(std::ceil(alpha * n - 1e-9));
  if (k < 1) throw InputError("rachev tail holds no observation");
  const double daily_rf = cfg.risk_free / cfg.annualization_factor;
  std::vector<double> gains;
  std::vector<double> losses;
  for (double r : returns) {
    gains.push_back(r - daily_rf);
    losses.push_back(daily_rf - r);
  }
  const double down = upper_tail_mean(std::move(losses), k);
  if (!(down > 0.0)) return std::nullopt;
  return upper_tail_mean(std::move(gains), k) / down;
}

MetricSet metric_set(std::span<const double> oos_returns, std::span<const double> wealth,
                     std::span<const Eigen::VectorXd> rebalance_weights,
                     const RollingConfig& cfg) {
  require_nonempty(oos_returns, "metric set");
  MetricSet m;
  m.mean_annual = mean_of(oos_returns) * cfg.annualization_factor;
  m.std_annual = population_std(oos_returns) * std::sqrt(cfg.annualization_factor);
  m.mdd = max_drawdown(wealth);
  m.ulcer = ulcer_index(wealth);
  m.sharpe = sharpe(oos_returns, cfg);
  m.sortino = sortino(oos_returns, cfg);
  m.turnover = rebalance_weights.size() >= 2 ? turnover(rebalance_weights) : 0.0;
  m.rachev_5 = rachev(oos_returns, 0.05, cfg);
  m.rachev_10 = rachev(oos_returns, 0.10, cfg);
  m.negative_excess = m.mean_annual < cfg.risk_free;
  return m;
}

std::vector<int> rank_values(std::span<const std::optional<double>> values,
                             Preference preference) {
  std::vector<int> ranks(values.size());
  int present = 0;
  for (const auto& v : values) present += v.has_value() ? 1 : 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) {
      ranks[i] = present + 1;
      continue;
    }
    int better = 0;
    for (const auto& w : values) {
      if (!w) continue;
      const bool wins = preference == Preference::higher_is_better ? *w > *values[i]
                                                                    : *w < *values[i];
      better += wins ? 1 : 0;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

}  // namespace madrp
