#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "madrp/backtest.hpp"
#include "madrp/solvers.hpp"

namespace madrp {

nlohmann::json to_json(const SolveStatus& status);
nlohmann::json to_json(const SolverReport& report, bool zero_times = false);
nlohmann::json to_json(const RollingConfig& cfg);
nlohmann::json to_json(const MetricSet& metrics);
nlohmann::json to_json(const BacktestResult& result, const RollingConfig& cfg,
                       Method strategy);

/// `asset_id,weight`
void write_weights_csv(std::ostream& out, const std::vector<std::string>& asset_ids,
                       const Eigen::VectorXd& weights);

/// One row per metric, one column per strategy; "--" for undefined values
/// and for suppressed ratios.
void write_metric_table(std::ostream& out, std::span<const std::string> strategies,
                        std::span<const MetricSet> metrics);

/// Rank (1 = best) of each strategy for each metric, same layout as the
/// metric table.
void write_rank_table(std::ostream& out, std::span<const std::string> strategies,
                      std::span<const MetricSet> metrics);

/// `day,<strategy>...` with W_0 on the first row.
void write_wealth_csv(std::ostream& out, std::span<const std::string> strategies,
                      std::span<const std::vector<double>> wealth);

}  // namespace madrp
