#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "madrp/error.hpp"
#include "madrp/report.hpp"

namespace madrp {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : json(nullptr);
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(number(v[i]));
  return arr;
}

struct MetricRow {
  const char* label;
  std::function<std::optional<double>(const MetricSet&)> get;
  Preference preference;
  bool suppress_on_negative;
};

const std::array<MetricRow, 9>& metric_rows() {
  static const std::array<MetricRow, 9> rows = {{
      {"mean", [](const MetricSet& m) { return std::optional<double>(m.mean_annual); },
       Preference::higher_is_better, false},
      {"std", [](const MetricSet& m) { return std::optional<double>(m.std_annual); },
       Preference::lower_is_better, false},
      {"mdd", [](const MetricSet& m) { return std::optional<double>(m.mdd); },
       Preference::higher_is_better, false},
      {"ulcer", [](const MetricSet& m) { return std::optional<double>(m.ulcer); },
       Preference::lower_is_better, false},
      {"sharpe", [](const MetricSet& m) { return m.sharpe; }, Preference::higher_is_better,
       true},
      {"sortino", [](const MetricSet& m) { return m.sortino; }, Preference::higher_is_better,
       true},
      {"turnover", [](const MetricSet& m) { return std::optional<double>(m.turnover); },
       Preference::lower_is_better, false},
      {"rachev_5", [](const MetricSet& m) { return m.rachev_5; }, Preference::higher_is_better,
       false},
      {"rachev_10", [](const MetricSet& m) { return m.rachev_10; },
       Preference::higher_is_better, false},
  }};
  return rows;
}

std::optional<double> shown(const MetricRow& row, const MetricSet& m) {
  if (row.suppress_on_negative && m.negative_excess) return std::nullopt;
  return row.get(m);
}

void check_columns(std::size_t names, std::size_t values) {
  if (names != values) throw InputError("strategy names and results differ in count");
}

}  // namespace

json to_json(const SolveStatus& status) {
  return {{"code", std::string(to_string(status.code))},
          {"iterations", status.iterations},
          {"kkt_residual", number(status.kkt_residual)},
          {"message", status.message}};
}

json to_json(const SolverReport& report, bool zero_times) {
  json j;
  j["method"] = std::string(to_string(report.method));
  j["weights"] = vector_json(report.weights.values());
  j["f"] = number(report.f_value);
  j["mad"] = number(report.mad_value);
  j["mean_abs_dev"] = number(report.mean_abs_dev);
  j["max_abs_dev"] = number(report.max_abs_dev);
  j["one_over_n"] = 1.0 / static_cast<double>(report.weights.size());
  j["wall_time"] = zero_times ? 0.0 : report.wall_time;
  j["status"] = to_json(report.status);
  j["risk_level"] = optional_number(report.risk_level);
  j["unique_optimum"] = report.unique_optimum;
  return j;
}

json to_json(const RollingConfig& cfg) {
  return {{"in_sample_days", cfg.in_sample_days},
          {"out_sample_days", cfg.out_sample_days},
          {"rebalance_days", cfg.rebalance_days},
          {"annualization_factor", cfg.annualization_factor},
          {"risk_free", cfg.risk_free}};
}

json to_json(const MetricSet& m) {
  return {{"mean", number(m.mean_annual)},
          {"std", number(m.std_annual)},
          {"mdd", number(m.mdd)},
          {"ulcer", number(m.ulcer)},
          {"sharpe", optional_number(m.sharpe)},
          {"sortino", optional_number(m.sortino)},
          {"turnover", number(m.turnover)},
          {"rachev_5", optional_number(m.rachev_5)},
          {"rachev_10", optional_number(m.rachev_10)},
          {"negative_excess", m.negative_excess}};
}

json to_json(const BacktestResult& result, const RollingConfig& cfg, Method strategy) {
  json weights = json::array();
  for (const auto& w : result.rebalance_weights) weights.push_back(vector_json(w));
  json wealth = json::array();
  for (double w : result.wealth) wealth.push_back(number(w));
  return {{"config", to_json(cfg)},
          {"strategy", std::string(to_string(strategy))},
          {"metrics", to_json(result.metrics)},
          {"wealth", wealth},
          {"rebalance_days", result.rebalance_days},
          {"rebalance_weights", weights}};
}

void write_weights_csv(std::ostream& out, const std::vector<std::string>& asset_ids,
                       const Eigen::VectorXd& weights) {
  if (static_cast<Index>(asset_ids.size()) != weights.size()) {
    throw InputError("asset ids and weights differ in length");
  }
  out << "asset_id,weight\n";
  for (std::size_t i = 0; i < asset_ids.size(); ++i) {
    out << asset_ids[i] << ',' << format_double(weights[static_cast<Index>(i)]) << '\n';
  }
}

void write_metric_table(std::ostream& out, std::span<const std::string> strategies,
                        std::span<const MetricSet> metrics) {
  check_columns(strategies.size(), metrics.size());
  out << "metric";
  for (const auto& s : strategies) out << ',' << s;
  out << '\n';
  for (const MetricRow& row : metric_rows()) {
    out << row.label;
    for (const MetricSet& m : metrics) {
      const auto v = shown(row, m);
      out << ',' << (v ? format_double(*v) : std::string("--"));
    }
    out << '\n';
  }
}

void write_rank_table(std::ostream& out, std::span<const std::string> strategies,
                      std::span<const MetricSet> metrics) {
  check_columns(strategies.size(), metrics.size());
  out << "metric";
  for (const auto& s : strategies) out << ',' << s;
  out << '\n';
  for (const MetricRow& row : metric_rows()) {
    std::vector<std::optional<double>> values;
    for (const MetricSet& m : metrics) values.push_back(shown(row, m));
    const std::vector<int> ranks = rank_values(values, row.preference);
    out << row.label;
    for (int r : ranks) out << ',' << r;
    out << '\n';
  }
}

void write_wealth_csv(std::ostream& out, std::span<const std::string> strategies,
                      std::span<const std::vector<double>> wealth) {
  check_columns(strategies.size(), wealth.size());
  out << "day";
  for (const auto& s : strategies) out << ',' << s;
  out << '\n';
  std::size_t len = 0;
  for (const auto& w : wealth) len = std::max(len, w.size());
  for (std::size_t t = 0; t < len; ++t) {
    out << t;
    for (const auto& w : wealth) out << ',' << (t < w.size() ? format_double(w[t]) : "");
    out << '\n';
  }
}

}  // namespace madrp
