#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "madrp/bench.hpp"
#include "madrp/error.hpp"
#include "oracles.hpp"

using namespace madrp;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<Method> all_methods() {
  return {Method::log_obj, Method::log_constr, Method::ls_rel, Method::ls_abs, Method::soe_1,
          Method::soe_2,   Method::closed_form, Method::vol_rp, Method::min_mad, Method::min_var,
          Method::ew};
}

}  // namespace

TEST_CASE("accuracy from shares") {
  SUBCASE("exact parity") {
    const AccuracyDiagnostics d = accuracy_from_shares(VectorXd::Constant(3, 1.0 / 3.0));
    CHECK(d.f_value <= 1e-32);
    CHECK(d.mean_abs_dev <= 1e-16);
    CHECK(d.max_abs_dev <= 1e-16);
  }
  SUBCASE("0.3, 0.3, 0.4") {
    const AccuracyDiagnostics d = accuracy_from_shares(vec({0.3, 0.3, 0.4}));
    CHECK(d.mean_abs_dev == doctest::Approx(0.2 / 4.5).epsilon(1e-12));
    CHECK(d.max_abs_dev == doctest::Approx(0.4 - 1.0 / 3.0).epsilon(1e-12));
    CHECK(d.f_value == doctest::Approx(0.02 / 3.0).epsilon(1e-12));
  }
  SUBCASE("uniform magnitudes") {
    const AccuracyDiagnostics d = accuracy_from_shares(vec({0.2, 0.3, 0.2, 0.3}));
    CHECK(d.f_value == doctest::Approx(4.0 * d.mean_abs_dev * d.mean_abs_dev).epsilon(1e-12));
  }
}

TEST_CASE("accuracy diagnostics on a portfolio") {
  const MatrixXd R = oracle::random_returns(3, 25, 4);
  const ScenarioMatrix scn(R);
  const VectorXd x = vec({0.2, 0.5, 0.3});
  const AccuracyDiagnostics d = accuracy_diagnostics(scn, x);
  const VectorXd dev = (oracle::rc_shares(R, x).array() - 1.0 / 3.0).matrix();
  CHECK(d.f_value == doctest::Approx(dev.squaredNorm()).epsilon(1e-10));
  CHECK(d.max_abs_dev == doctest::Approx(dev.cwiseAbs().maxCoeff()).epsilon(1e-10));
  CHECK(d.mean_abs_dev <= d.max_abs_dev);
  CHECK_THROWS_AS(accuracy_diagnostics(scn, VectorXd::Zero(3)), InputError);
}

TEST_CASE("ew row") {
  const ScenarioMatrix scn(oracle::random_returns(4, 30, 1));
  const std::vector<Method> m{Method::ew};
  const auto rows = run_bench(scn, m);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].time_secs > 0.0);
  CHECK(rows[0].one_over_n == 0.25);
  CHECK(rows[0].max_abs_dev > 0.0);
  CHECK_FALSE(rows[0].error);
}

TEST_CASE("additive market: every RP row is accurate and closed form is exact") {
  const std::vector<double> scales{0.7, 1.0, 1.6};
  const ScenarioMatrix scn = synth_comonotone(3, 16, scales, 12);
  const auto methods = all_methods();
  const auto rows = run_bench(scn, methods);
  REQUIRE(rows.size() == methods.size());
  double closed = 1.0;
  double best_other = 1.0;
  for (const BenchRow& r : rows) {
    CHECK_FALSE(r.error);
    if (!is_mad_rp(r.method)) continue;
    CHECK(r.max_abs_dev <= 1e-4);
    if (r.method == Method::closed_form) {
      closed = r.max_abs_dev;
    } else {
      best_other = std::min(best_other, r.max_abs_dev);
    }
  }
  CHECK(closed <= 1e-14);
  CHECK(closed <= best_other);
}

TEST_CASE("rows are derivable from their weights") {
  const ScenarioMatrix scn(oracle::random_returns(4, 20, 9));
  const auto methods = all_methods();
  for (const BenchRow& r : run_bench(scn, methods)) {
    if (r.error) {
      CHECK(r.weights.size() == 0);
      CHECK(std::isnan(r.max_abs_dev));
      continue;
    }
    CAPTURE(to_string(r.method));
    const AccuracyDiagnostics d = accuracy_diagnostics(scn, r.weights);
    CHECK(std::abs(d.f_value - r.f_value) <= 1e-12);
    CHECK(std::abs(d.mean_abs_dev - r.mean_abs_dev) <= 1e-12);
    CHECK(std::abs(d.max_abs_dev - r.max_abs_dev) <= 1e-12);
    CHECK(std::abs(mad(scn, r.weights) - r.mad_value) <= 1e-12);
  }
}

TEST_CASE("failures are recorded in the row") {
  // Non-additive market: closed form fails, the others still run.
  const ScenarioMatrix scn(oracle::random_returns(3, 20, 2));
  const std::vector<Method> m{Method::closed_form, Method::ew};
  const auto rows = run_bench(scn, m);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].error);
  CHECK(rows[0].error->find("additive") != std::string::npos);
  CHECK_FALSE(rows[1].error);
}

TEST_CASE("first-days window and options") {
  const ScenarioMatrix scn(oracle::random_returns(3, 40, 6));
  const std::vector<Method> m{Method::log_constr};
  BenchConfig cfg;
  cfg.first_days = 20;
  const auto a = run_bench(scn, m, cfg);
  const auto b = run_bench(scn.first(20), m);
  CHECK((a[0].weights - b[0].weights).cwiseAbs().maxCoeff() == 0.0);
  cfg.first_days = 41;
  CHECK_THROWS_AS(run_bench(scn, m, cfg), InputError);
  cfg.first_days = 1;
  CHECK_THROWS_AS(run_bench(scn, m, cfg), InputError);
  CHECK_THROWS_AS(run_bench(scn, std::vector<Method>{}), InputError);
}

TEST_CASE("parallel and repeated runs give the same rows") {
  const ScenarioMatrix scn(oracle::random_returns(3, 20, 8));
  const std::vector<Method> m{Method::log_obj, Method::ls_rel, Method::min_mad, Method::ew};
  const auto seq = run_bench(scn, m);
  BenchConfig cfg;
  cfg.parallel = true;
  const auto par = run_bench(scn, m, cfg);
  cfg.parallel = false;
  cfg.repeats = 3;
  const auto rep = run_bench(scn, m, cfg);
  for (std::size_t k = 0; k < m.size(); ++k) {
    CHECK(seq[k].method == par[k].method);
    CHECK(seq[k].weights == par[k].weights);
    CHECK(seq[k].weights == rep[k].weights);
  }
}

TEST_CASE("csv and table output") {
  const ScenarioMatrix scn(oracle::random_returns(3, 20, 2));
  const std::vector<Method> m{Method::ew, Method::closed_form};
  const auto rows = run_bench(scn, m);
  std::ostringstream csv;
  write_bench_csv(csv, rows, true);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,f,mad,mean_abs_dev,max_abs_dev,one_over_n,time_secs");
  std::getline(in, line);
  CHECK(line.rfind("ew,", 0) == 0);
  CHECK(line.substr(line.size() - 2) == ",0");
  std::getline(in, line);
  CHECK(line.find("nan") != std::string::npos);
  std::ostringstream txt;
  write_bench_table(txt, rows, true);
  CHECK(txt.str().find("closed_form") != std::string::npos);
}
