#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "madrp/scenarios.hpp"
#include "madrp/solvers.hpp"

namespace madrp {

/// Rolling time window: calibrate on the trailing `in_sample_days` returns,
/// hold for `out_sample_days`, move forward by `rebalance_days`.
struct RollingConfig {
  Index in_sample_days = 250;
  Index out_sample_days = 20;
  Index rebalance_days = 20;
  double annualization_factor = 250.0;
  double risk_free = 0.0;  // annual rate

  void validate() const;
};

struct MetricSet {
  double mean_annual = 0.0;
  double std_annual = 0.0;
  double mdd = 0.0;
  double ulcer = 0.0;
  std::optional<double> sharpe;
  std::optional<double> sortino;
  double turnover = 0.0;
  std::optional<double> rachev_5;
  std::optional<double> rachev_10;

  /// Ratios are shown as "--" in the metric tables when the mean excess
  /// return is negative.
  bool negative_excess = false;
};

struct BacktestResult {
  std::vector<double> wealth;       // W_0 = 1 first
  std::vector<double> oos_returns;  // R_t, t = 1..
  std::vector<Eigen::VectorXd> rebalance_weights;
  std::vector<Index> rebalance_days;  // return index where each holding starts
  MetricSet metrics;
};

struct Strategy {
  Method method = Method::ew;
  SolverOptions options;
};

/// Thrown when a solve fails at a rebalance; carries the window index.
class BacktestError : public std::runtime_error {
 public:
  BacktestError(const std::string& what, std::size_t window)
      : std::runtime_error(what), window_(window) {}
  std::size_t window() const noexcept { return window_; }

 private:
  std::size_t window_;
};

BacktestResult run_backtest(const PriceSeries& prices, const Strategy& strategy,
                            const RollingConfig& cfg);

/// Same protocol on precomputed returns (rows are days).
BacktestResult run_backtest(const Eigen::MatrixXd& returns, const Strategy& strategy,
                            const RollingConfig& cfg);

// Performance metrics ------------------------------------------------------

/// dd_t = (W_t - max_{tau<=t} W_tau) / max_{tau<=t} W_tau for t >= 1; the
/// running peak includes W_0.
std::vector<double> drawdowns(std::span<const double> wealth);
double max_drawdown(std::span<const double> wealth);
double ulcer_index(std::span<const double> wealth);

double sharpe_ratio(double mean_annual, double std_annual, double risk_free);
std::optional<double> sharpe(std::span<const double> returns, const RollingConfig& cfg);

/// sqrt(mean(min(R - threshold, 0)^2)), not annualized.
double target_downside_deviation(std::span<const double> returns, double threshold);
std::optional<double> sortino(std::span<const double> returns, const RollingConfig& cfg);

/// (1/Q) sum_q ||x_q - x_{q-1}||_1 over Q+1 weight vectors.
double turnover(std::span<const Eigen::VectorXd> weights);

/// Mean of the ceil(alpha T) largest excess returns over the mean of the
/// ceil(alpha T) largest shortfalls, on daily returns.
std::optional<double> rachev(std::span<const double> returns, double alpha,
                             const RollingConfig& cfg);

MetricSet metric_set(std::span<const double> oos_returns, std::span<const double> wealth,
                     std::span<const Eigen::VectorXd> rebalance_weights,
                     const RollingConfig& cfg);

enum class Preference { higher_is_better, lower_is_better };

/// 1 = best. Ties share the better rank; missing values rank last.
std::vector<int> rank_values(std::span<const std::optional<double>> values,
                             Preference preference);

}  // namespace madrp
