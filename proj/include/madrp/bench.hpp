#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "madrp/solvers.hpp"

namespace madrp {

/// Deviation of relative risk contributions RC_i / MAD from 1/n.
struct AccuracyDiagnostics {
  double f_value = 0.0;       // sum (RC_i/MAD - 1/n)^2
  double mean_abs_dev = 0.0;  // (1/n) sum |RC_i/MAD - 1/n|
  double max_abs_dev = 0.0;   // max |RC_i/MAD - 1/n|
};

AccuracyDiagnostics accuracy_from_shares(const Eigen::VectorXd& rc_over_mad);

/// Risk contributions use the balanced tie rule. Throws InputError when
/// MAD(x) is zero.
AccuracyDiagnostics accuracy_diagnostics(const ScenarioMatrix& scn,
                                         const Eigen::Ref<const Eigen::VectorXd>& x);

struct BenchRow {
  Method method = Method::ew;
  double f_value = 0.0;
  double mad_value = 0.0;
  double mean_abs_dev = 0.0;
  double max_abs_dev = 0.0;
  double one_over_n = 0.0;
  double time_secs = 0.0;
  SolveStatus status;
  std::optional<std::string> error;
  Eigen::VectorXd weights;  // empty when the method failed
};

struct BenchConfig {
  std::optional<Index> first_days;
  SolverOptions solver;
  int repeats = 1;        // > 1: report the median time
  bool parallel = false;  // accuracy-only runs
};

std::vector<BenchRow> run_bench(const ScenarioMatrix& scn,
                                std::span<const Method> methods,
                                const BenchConfig& config = {});

/// `method,f,mad,mean_abs_dev,max_abs_dev,one_over_n,time_secs`
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows,
                     bool zero_times = false);
void write_bench_table(std::ostream& out, std::span<const BenchRow> rows,
                       bool zero_times = false);

}  // namespace madrp
