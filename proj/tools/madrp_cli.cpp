// madrp: MAD risk parity solves, solver benchmarks, rolling backtests and
// synthetic data sets.
//
// Exit codes: 0 success, 1 computation failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "madrp/backtest.hpp"
#include "madrp/bench.hpp"
#include "madrp/error.hpp"
#include "madrp/report.hpp"
#include "madrp/scenarios.hpp"
#include "madrp/solvers.hpp"

namespace fs = std::filesystem;
using namespace madrp;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string path;
  bool no_header = false;
  bool no_date_column = false;
  char delimiter = ',';

  CsvLayout layout() const { return {!no_header, !no_date_column, delimiter}; }
};

struct SolverFlags {
  double tol = 1e-8;
  int max_iter = 200;
  std::optional<double> log_weight;
  std::optional<double> log_floor;
  bool budget = false;
  int restarts = 5;
  std::uint64_t seed = 20240901;
  Index soe_max_t = 32;
  bool no_refine = false;

  SolverOptions options() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.log_weight = log_weight;
    o.log_floor = log_floor;
    o.budget_constraint = budget;
    o.restarts = restarts;
    o.seed = seed;
    o.soe_max_scenarios = soe_max_t;
    o.refine = !no_refine;
    return o;
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.path, "Price CSV (one column per asset)")->required();
  cmd->add_flag("--no-header", d.no_header, "CSV has no asset header row");
  cmd->add_flag("--no-date-column", d.no_date_column, "CSV has no leading date column");
  cmd->add_option("--delimiter", d.delimiter, "CSV field delimiter");
}

void add_solver_flags(CLI::App* cmd, SolverFlags& s) {
  cmd->add_option("--tol", s.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", s.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--log-weight", s.log_weight, "log_obj weight (default mad(EW)/n)");
  cmd->add_option("--log-floor", s.log_floor, "log_constr floor (default -n ln n)");
  cmd->add_flag("--budget", s.budget, "Add sum x = 1 to log_constr");
  cmd->add_option("--restarts", s.restarts, "Least-squares multi-start count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.seed, "Seed for random restarts");
  cmd->add_option("--soe-max-t", s.soe_max_t, "Scenario cap of the sign-pattern search")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-refine", s.no_refine, "Skip the active-set polish of RP solutions");
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<std::string> tokens;
  for (const auto& item : names) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
  }
  if (tokens.empty()) throw UsageError("method list is empty");
  std::vector<Method> out;
  for (const auto& t : tokens) {
    if (t == "all") {
      for (Method m : {Method::log_obj, Method::log_constr, Method::ls_rel, Method::ls_abs,
                       Method::soe_1, Method::soe_2, Method::closed_form, Method::vol_rp,
                       Method::min_mad, Method::min_var, Method::ew}) {
        out.push_back(m);
      }
      continue;
    }
    const auto m = parse_method(t);
    if (!m) throw UsageError("unknown method '" + t + "'");
    out.push_back(*m);
  }
  return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& item : names) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) out.push_back(tok);
    }
  }
  return out;
}

fs::path prepare_out_dir(const std::string& dir) {
  const fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Civil date from days since 1970-01-01.
std::string iso_date(long days) {
  days += 719468;
  const long era = (days >= 0 ? days : days - 146096) / 146097;
  const long doe = days - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  const long d = doy - (153 * mp + 2) / 5 + 1;
  const long m = mp < 10 ? mp + 3 : mp - 9;
  const long y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04ld-%02ld-%02ld", y, m, d);
  return buf;
}

BenchRow row_from_report(const SolverReport& r) {
  BenchRow row;
  row.method = r.method;
  row.f_value = r.f_value;
  row.mad_value = r.mad_value;
  row.mean_abs_dev = r.mean_abs_dev;
  row.max_abs_dev = r.max_abs_dev;
  row.one_over_n = 1.0 / static_cast<double>(r.weights.size());
  row.time_secs = r.wall_time;
  row.status = r.status;
  row.weights = r.weights.values();
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAD risk parity portfolios: solve, benchmark, backtest"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string out_dir;
  bool deterministic = false;
  app.add_option("--out-dir", out_dir, "Output directory")->envname("MADRP_OUT_DIR");
  app.add_flag("--deterministic", deterministic,
               "Write zero timings so repeated runs are byte-identical");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one portfolio and write weights");
  DataFlags solve_data;
  SolverFlags solve_solver;
  std::string solve_method;
  bool n_from_data = false;
  add_data_flags(solve_cmd, solve_data);
  add_solver_flags(solve_cmd, solve_solver);
  solve_cmd->add_option("--method", solve_method, "Strategy name")->required();
  solve_cmd->add_flag("--n-from-data", n_from_data, "Take n from the data set (ew)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Accuracy/efficiency table for many methods");
  DataFlags bench_data;
  SolverFlags bench_solver;
  std::vector<std::string> bench_methods{"all"};
  std::optional<Index> first_days;
  int repeats = 1;
  bool parallel = false;
  add_data_flags(bench_cmd, bench_data);
  add_solver_flags(bench_cmd, bench_solver);
  bench_cmd->add_option("--methods", bench_methods, "Comma-separated methods or 'all'");
  bench_cmd->add_option("--first-days", first_days, "Use only the first T returns");
  bench_cmd->add_option("--repeats", repeats, "Timing repeats (median reported)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--parallel", parallel, "Run methods concurrently");

  // backtest
  auto* bt_cmd = app.add_subcommand("backtest", "Rolling-window out-of-sample evaluation");
  DataFlags bt_data;
  SolverFlags bt_solver;
  std::vector<std::string> strategies{"minv,minmad,volrp,madrp,ew"};
  RollingConfig rolling;
  add_data_flags(bt_cmd, bt_data);
  add_solver_flags(bt_cmd, bt_solver);
  bt_cmd->add_option("--strategies", strategies, "Comma-separated strategies");
  bt_cmd->add_option("--in-sample", rolling.in_sample_days, "In-sample window (days)");
  bt_cmd->add_option("--out-sample", rolling.out_sample_days, "Holding window (days)");
  bt_cmd->add_option("--rebalance", rolling.rebalance_days, "Rebalancing step (days)");
  bt_cmd->add_option("--annualization", rolling.annualization_factor, "Days per year");
  bt_cmd->add_option("--risk-free", rolling.risk_free, "Annual risk-free rate");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic price CSV");
  std::string kind = "comonotone";
  Index synth_n = 3;
  Index synth_t = 250;
  std::uint64_t synth_seed = 1;
  std::vector<double> scales;
  std::string synth_out;
  synth_cmd->add_option("--kind", kind, "comonotone or random")
      ->check(CLI::IsMember({"comonotone", "random"}));
  synth_cmd->add_option("--n", synth_n, "Number of assets")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--t", synth_t, "Number of returns")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--scales", scales, "Factor loadings (comonotone)")->delimiter(',');
  synth_cmd->add_option("--out", synth_out, "Output CSV (default: <out-dir>/synth_*.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve_cmd) {
      const auto methods = parse_methods({solve_method});
      if (methods.size() != 1) throw UsageError("solve takes exactly one method");
      const Method method = methods.front();
      const PriceSeries prices = load_csv(solve_data.path, solve_data.layout());
      const ScenarioMatrix scn = returns_from_prices(prices);
      SolverReport report = solve(scn, method, solve_solver.options());
      if (deterministic) report.wall_time = 0.0;
      const fs::path dir = prepare_out_dir(out_dir);
      const std::string name(to_string(method));
      std::ostringstream weights;
      write_weights_csv(weights, prices.asset_ids, report.weights.values());
      write_file(dir / ("weights_" + name + ".csv"), weights.str());
      write_file(dir / ("report_" + name + ".json"), dump(to_json(report, deterministic)));
      const BenchRow row = row_from_report(report);
      write_bench_table(std::cout, std::span<const BenchRow>(&row, 1), deterministic);
      return 0;
    }

    if (*bench_cmd) {
      const auto methods = parse_methods(bench_methods);
      const PriceSeries prices = load_csv(bench_data.path, bench_data.layout());
      BenchConfig cfg;
      cfg.first_days = first_days;
      cfg.solver = bench_solver.options();
      cfg.repeats = repeats;
      cfg.parallel = parallel;
      const auto rows = run_bench(returns_from_prices(prices), methods, cfg);
      const fs::path dir = prepare_out_dir(out_dir);
      std::ostringstream csv;
      std::ostringstream table;
      write_bench_csv(csv, rows, deterministic);
      write_bench_table(table, rows, deterministic);
      write_file(dir / "bench.csv", csv.str());
      write_file(dir / "bench.txt", table.str());
      std::cout << table.str();
      return 0;
    }

    if (*bt_cmd) {
      const auto labels = split_list(strategies);
      const auto methods = parse_methods(labels);
      rolling.validate();
      const PriceSeries prices = load_csv(bt_data.path, bt_data.layout());
      const fs::path dir = prepare_out_dir(out_dir);
      std::vector<MetricSet> metrics;
      std::vector<std::vector<double>> wealth;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const BacktestResult res =
            run_backtest(prices, Strategy{methods[k], bt_solver.options()}, rolling);
        write_file(dir / ("backtest_" + labels[k] + ".json"),
                   dump(to_json(res, rolling, methods[k])));
        metrics.push_back(res.metrics);
        wealth.push_back(res.wealth);
      }
      std::ostringstream table;
      std::ostringstream ranks;
      std::ostringstream wealth_csv;
      write_metric_table(table, labels, metrics);
      write_rank_table(ranks, labels, metrics);
      write_wealth_csv(wealth_csv, labels, wealth);
      write_file(dir / "metrics.csv", table.str());
      write_file(dir / "ranks.csv", ranks.str());
      write_file(dir / "wealth.csv", wealth_csv.str());
      std::cout << table.str();
      return 0;
    }

    if (*synth_cmd) {
      ScenarioMatrix scn = [&] {
        if (kind == "comonotone") {
          if (scales.empty()) {
            for (Index i = 0; i < synth_n; ++i) scales.push_back(0.5 + 0.5 * static_cast<double>(i));
          }
          if (static_cast<Index>(scales.size()) != synth_n) {
            throw UsageError("--scales needs exactly --n values");
          }
          return synth_comonotone(synth_n, synth_t, scales, synth_seed);
        }
        return synth_random_market(synth_n, synth_t, synth_seed);
      }();
      std::vector<std::string> ids;
      for (Index i = 0; i < synth_n; ++i) ids.push_back("asset_" + std::to_string(i + 1));
      PriceSeries prices = prices_from_returns(scn.returns(), ids);
      std::vector<std::string> dates;
      const long start = 10957;  // 2000-01-01
      for (Index t = 0; t < prices.num_rows(); ++t) dates.push_back(iso_date(start + t));
      prices.dates = dates;
      fs::path path = synth_out;
      if (path.empty()) {
        path = prepare_out_dir(out_dir) /
               ("synth_" + kind + "_n" + std::to_string(synth_n) + "_t" +
                std::to_string(synth_t) + "_s" + std::to_string(synth_seed) + ".csv");
      } else if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
      }
      save_csv(path, prices);
      std::cout << path.string() << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const SolveFailure& e) {
    nlohmann::json err = {{"error", {{"type", "solve_failure"},
                                     {"message", e.what()},
                                     {"status", to_json(e.status())}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const BacktestError& e) {
    nlohmann::json err = {{"error", {{"type", "backtest_failure"},
                                     {"message", e.what()},
                                     {"window", e.window()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const InputError& e) {
    nlohmann::json err = {{"error", {{"type", "input_error"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", {{"type", "failure"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 2;
}
