#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <future>
#include <ostream>
#include <string>

#include "madrp/bench.hpp"
#include "madrp/error.hpp"

namespace madrp {

using Eigen::VectorXd;

AccuracyDiagnostics accuracy_from_shares(const VectorXd& rc_over_mad) {
  const Index n = rc_over_mad.size();
  if (n == 0) throw InputError("accuracy diagnostics need at least one asset");
  const VectorXd dev = rc_over_mad.array() - 1.0 / static_cast<double>(n);
  AccuracyDiagnostics out;
  out.f_value = dev.squaredNorm();
  out.mean_abs_dev = dev.cwiseAbs().mean();
  out.max_abs_dev = dev.cwiseAbs().maxCoeff();
  return out;
}

AccuracyDiagnostics accuracy_diagnostics(const ScenarioMatrix& scn,
                                         const Eigen::Ref<const VectorXd>& x) {
  const double total = mad(scn, x);
  if (!(total > 0.0)) {
    throw InputError("relative risk contributions are undefined at a portfolio with zero MAD");
  }
  const RiskContributionVector rc = risk_contributions(scn, x, TieRule::balanced);
  return accuracy_from_shares(rc.rc / total);
}

namespace {

BenchRow run_one(const ScenarioMatrix& scn, Method method, const BenchConfig& cfg) {
  BenchRow row;
  row.method = method;
  row.one_over_n = 1.0 / static_cast<double>(scn.num_assets());
  std::vector<double> times;
  try {
    SolverReport report;
    for (int k = 0; k < std::max(cfg.repeats, 1); ++k) {
      const auto start = std::chrono::steady_clock::now();
      report = solve(scn, method, cfg.solver);
      times.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(times.begin(), times.end());
    row.time_secs = times[times.size() / 2];
    row.f_value = report.f_value;
    row.mad_value = report.mad_value;
    row.mean_abs_dev = report.mean_abs_dev;
    row.max_abs_dev = report.max_abs_dev;
    row.status = report.status;
    row.weights = report.weights.values();
  } catch (const SolveFailure& e) {
    row.status = e.status();
    row.error = e.what();
  } catch (const std::exception& e) {
    row.status.code = SolveStatusCode::infeasible;
    row.status.message = e.what();
    row.error = e.what();
  }
  if (row.error) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.f_value = row.mad_value = row.mean_abs_dev = row.max_abs_dev = nan;
  }
  return row;
}

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

std::string sci(double v) {
  if (std::isnan(v)) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

std::vector<BenchRow> run_bench(const ScenarioMatrix& scn, std::span<const Method> methods,
                                const BenchConfig& config) {
  if (methods.empty()) throw InputError("bench needs at least one method");
  const ScenarioMatrix* data = &scn;
  std::optional<ScenarioMatrix> window;
  if (config.first_days) {
    const Index days = *config.first_days;
    if (days < 2 || days > scn.num_scenarios()) {
      throw InputError("first_days must be between 2 and " +
                       std::to_string(scn.num_scenarios()) + ", got " + std::to_string(days));
    }
    window.emplace(scn.first(days));
    data = &*window;
  }
  std::vector<BenchRow> rows;
  if (config.parallel) {
    std::vector<std::future<BenchRow>> jobs;
    for (Method m : methods) {
      jobs.push_back(std::async(std::launch::async, run_one, std::cref(*data), m,
                                std::cref(config)));
    }
    for (auto& j : jobs) rows.push_back(j.get());
  } else {
    for (Method m : methods) rows.push_back(run_one(*data, m, config));
  }
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows, bool zero_times) {
  out << "method,f,mad,mean_abs_dev,max_abs_dev,one_over_n,time_secs\n";
  for (const BenchRow& r : rows) {
    out << to_string(r.method) << ',' << cell(r.f_value) << ',' << cell(r.mad_value) << ','
        << cell(r.mean_abs_dev) << ',' << cell(r.max_abs_dev) << ',' << cell(r.one_over_n)
        << ',' << cell(zero_times ? 0.0 : r.time_secs) << '\n';
  }
}

void write_bench_table(std::ostream& out, std::span<const BenchRow> rows, bool zero_times) {
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %11s %11s %11s %11s %11s %11s  %s\n", "Method",
                "F(x)", "MAD(x)", "MeanAbsDev", "MaxAbsDev", "1/n", "Time(s)", "Status");
  out << line;
  for (const BenchRow& r : rows) {
    const std::string status =
        r.error ? std::string(to_string(r.status.code)) + ": " + *r.error
                : std::string(to_string(r.status.code));
    std::snprintf(line, sizeof line, "%-12s %11s %11s %11s %11s %11s %11s  ",
                  std::string(to_string(r.method)).c_str(), sci(r.f_value).c_str(),
                  sci(r.mad_value).c_str(), sci(r.mean_abs_dev).c_str(),
                  sci(r.max_abs_dev).c_str(), sci(r.one_over_n).c_str(),
                  sci(zero_times ? 0.0 : r.time_secs).c_str());
    out << line << status << '\n';
  }
}

}  // namespace madrp
