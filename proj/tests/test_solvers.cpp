#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
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

// Swapping the two assets permutes the scenarios, so the RP point is EW.
ScenarioMatrix symmetric_pair() {
  MatrixXd r(4, 2);
  r << 0.02, -0.01, -0.01, 0.02, -0.015, 0.005, 0.005, -0.015;
  return ScenarioMatrix(r);
}

ScenarioMatrix comonotone_pair() {
  MatrixXd r(4, 2);
  r << 0.02, 0.01, -0.02, -0.01, 0.02, 0.01, -0.02, -0.01;
  return ScenarioMatrix(r);
}

// Exactly uncorrelated columns with population std s1 and s2.
ScenarioMatrix orthogonal_pair(double s1, double s2) {
  MatrixXd r(4, 2);
  r << s1, s2, -s1, s2, s1, -s2, -s1, -s2;
  return ScenarioMatrix(r);
}

double inf_dist(const VectorXd& a, const VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::log_obj, Method::log_constr, Method::ls_rel, Method::ls_abs,
                   Method::soe_1, Method::soe_2, Method::closed_form, Method::vol_rp,
                   Method::min_mad, Method::min_var, Method::ew}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_method("minv") == Method::min_var);
  CHECK(parse_method("minmad") == Method::min_mad);
  CHECK(parse_method("volrp") == Method::vol_rp);
  CHECK(parse_method("madrp") == Method::log_constr);
  CHECK_FALSE(parse_method("nope").has_value());
  CHECK(is_mad_rp(Method::ls_abs));
  CHECK_FALSE(is_mad_rp(Method::ew));
}

TEST_CASE("log_obj") {
  SUBCASE("symmetric pair") {
    const SolverReport r = solve_log_obj(symmetric_pair());
    CHECK(r.status.optimal());
    CHECK(inf_dist(r.weights.values(), vec({0.5, 0.5})) <= 1e-6);
    CHECK(r.weights.normalized());
  }
  SUBCASE("comonotone pair") {
    const SolverReport r = solve_log_obj(comonotone_pair());
    CHECK(inf_dist(r.weights.values(), vec({1.0 / 3.0, 2.0 / 3.0})) <= 1e-5);
  }
  SUBCASE("random instances are near parity") {
    for (int k = 0; k < 5; ++k) {
      const SolverReport r = solve_log_obj(ScenarioMatrix(oracle::random_returns(4, 25, 40 + k)));
      CHECK(r.max_abs_dev <= 1e-3);
      CHECK(r.mean_abs_dev <= r.max_abs_dev);
    }
  }
  SUBCASE("nonpositive weight is rejected") {
    SolverOptions o;
    o.log_weight = 0.0;
    CHECK_THROWS_AS(solve_log_obj(symmetric_pair(), o), InputError);
  }
  SUBCASE("normalisation makes lambda immaterial") {
    const ScenarioMatrix scn(oracle::random_returns(3, 20, 3));
    SolverOptions o;
    o.log_weight = 10.0;
    const VectorXd a = solve_log_obj(scn, o).weights.values();
    o.log_weight = 1e-4;
    const VectorXd b = solve_log_obj(scn, o).weights.values();
    CHECK(inf_dist(a, b) <= 1e-8);
  }
}

TEST_CASE("log_constr") {
  SUBCASE("budget constraint at the EW floor gives EW exactly") {
    SolverOptions o;
    o.budget_constraint = true;
    const SolverReport r = solve_log_constr(ScenarioMatrix(oracle::random_returns(4, 20, 1)), o);
    CHECK(r.weights.values() == VectorXd::Constant(4, 0.25));
  }
  SUBCASE("budget constraint with an unreachable floor is infeasible") {
    SolverOptions o;
    o.budget_constraint = true;
    o.log_floor = -std::log(4.0) * 4.0 + 0.1;
    CHECK_THROWS_AS(solve_log_constr(ScenarioMatrix(oracle::random_returns(4, 20, 1)), o),
                    SolveFailure);
  }
  SUBCASE("symmetric pair with c = 0") {
    SolverOptions o;
    o.log_floor = 0.0;
    CHECK(inf_dist(solve_log_constr(symmetric_pair(), o).weights.values(), vec({0.5, 0.5})) <= 1e-6);
  }
  SUBCASE("agrees with log_obj") {
    for (int k = 0; k < 8; ++k) {
      const ScenarioMatrix scn(oracle::random_returns(2 + k % 4, 15 + 2 * k, 70 + k));
      CHECK(inf_dist(solve_log_constr(scn).weights.values(), solve_log_obj(scn).weights.values()) <=
            1e-4);
    }
  }
  SUBCASE("optimality against perturbations") {
    // Convex problem, so local optimality on the floor surface is global.
    const MatrixXd R = oracle::random_returns(3, 18, 5);
    const ScenarioMatrix scn(R);
    const SolverReport r = solve_log_constr(scn);
    const VectorXd x = r.weights.values();
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 0.05);
    const double base = oracle::mad(R, x);
    for (int k = 0; k < 300; ++k) {
      VectorXd y = x;
      for (Index i = 0; i < 3; ++i) y[i] *= std::exp(z(rng));
      y *= std::exp((x.array().log().sum() - y.array().log().sum()) / 3.0);
      CHECK(oracle::mad(R, y) >= base - 1e-12);
    }
  }
}

TEST_CASE("ls_rel") {
  SUBCASE("starting at parity does not move") {
    const std::vector<double> scales{1.0, 2.0, 0.5};
    const ScenarioMatrix scn = synth_comonotone(3, 40, scales, 9);
    const SolverReport r = solve_ls_rel(scn);
    CHECK(r.f_value <= 1e-12);
    CHECK(inf_dist(r.weights.values(), closed_form_rp(scn).values()) <= 1e-12);
  }
  SUBCASE("symmetric pair") {
    CHECK(inf_dist(solve_ls_rel(symmetric_pair()).weights.values(), vec({0.5, 0.5})) <= 1e-6);
  }
  SUBCASE("random n=3, T=20") {
    for (int k = 0; k < 5; ++k) {
      const ScenarioMatrix scn(oracle::random_returns(3, 20, 300 + k));
      const SolverReport r = solve_ls_rel(scn);
      CHECK(r.status.optimal());
      CHECK(r.f_value <= 1e-8);
      CHECK(inf_dist(r.weights.values(), solve_log_constr(scn).weights.values()) <= 1e-4);
    }
  }
  SUBCASE("single asset is rejected") {
    CHECK_THROWS_AS(solve_ls_rel(ScenarioMatrix(oracle::random_returns(1, 10, 1))), InputError);
  }
}

TEST_CASE("ls_abs") {
  SUBCASE("parity point has zero objective") {
    const SolverReport r = solve_ls_abs(comonotone_pair());
    CHECK(r.f_value <= 1e-12);
  }
  SUBCASE("two assets match bisection on the weight") {
    for (int k = 0; k < 6; ++k) {
      const MatrixXd R = oracle::random_returns(2, 12 + 3 * k, 500 + k);
      // RC_1 - RC_2 changes sign exactly once on (0, 1).
      const auto diff = [&](double w) {
        const VectorXd s = oracle::rc_shares(R, vec({w, 1.0 - w}));
        return s[0] - s[1];
      };
      double lo = 1e-9, hi = 1.0 - 1e-9;
      REQUIRE(diff(lo) < 0.0);
      REQUIRE(diff(hi) > 0.0);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (diff(mid) < 0.0 ? lo : hi) = mid;
      }
      const SolverReport r = solve_ls_abs(ScenarioMatrix(R));
      CHECK(r.weights[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
    }
  }
  SUBCASE("scaling the returns leaves the argmin unchanged") {
    const ScenarioMatrix scn(oracle::random_returns(3, 20, 61));
    const SolverReport a = solve_ls_abs(scn);
    const SolverReport b = solve_ls_abs(scn.scaled(2.0));
    CHECK(inf_dist(a.weights.values(), b.weights.values()) <= 1e-6);
    CHECK(b.mad_value == doctest::Approx(2.0 * a.mad_value).epsilon(1e-6));
  }
}

TEST_CASE("min_mad") {
  SUBCASE("a zero-MAD asset takes all the weight") {
    MatrixXd r(4, 3);
    r << 0.01, 0.02, 0.25, -0.02, 0.01, 0.25, 0.03, -0.02, 0.25, -0.01, 0.0, 0.25;
    const SolverReport rep = solve_min_mad(ScenarioMatrix(r));
    CHECK(rep.weights[2] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.mad_value <= 1e-9);
  }
  SUBCASE("exact hedge") {
    MatrixXd r(2, 2);
    r << 0.01, -0.01, -0.01, 0.01;
    const SolverReport rep = solve_min_mad(ScenarioMatrix(r));
    CHECK(inf_dist(rep.weights.values(), vec({0.5, 0.5})) <= 1e-7);
    CHECK(rep.mad_value <= 1e-9);
  }
  SUBCASE("n=3, T=10 against the grid") {
    for (int k = 0; k < 4; ++k) {
      const MatrixXd R = oracle::random_returns(3, 10, 800 + k);
      const SolverReport rep = solve_min_mad(ScenarioMatrix(R));
      const auto [arg, best] = oracle::simplex_grid_min3(
          [&](const VectorXd& x) { return oracle::mad(R, x); }, 1e-3);
      CHECK(rep.mad_value <= best + 1e-12);
      CHECK(rep.mad_value >= best - 1e-3);
      (void)arg;
    }
  }
}

TEST_CASE("min_var") {
  SUBCASE("uncorrelated pair") {
    const SolverReport r = solve_min_var(orthogonal_pair(0.1, 0.2));
    CHECK(r.status.optimal());
    CHECK(r.weights[0] == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(r.weights[1] == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(r.unique_optimum);
  }
  SUBCASE("identical assets are flagged") {
    MatrixXd r(5, 2);
    r.col(0) = vec({0.01, -0.02, 0.03, 0.0, -0.01});
    r.col(1) = r.col(0);
    CHECK_FALSE(solve_min_var(ScenarioMatrix(r)).unique_optimum);
  }
  SUBCASE("n=3 against the grid") {
    const MatrixXd R = oracle::random_returns(3, 30, 17);
    const SolverReport rep = solve_min_var(ScenarioMatrix(R));
    const auto var = [&](const VectorXd& x) {
      const double v = oracle::volatility(R, x);
      return v * v;
    };
    const auto [arg, best] = oracle::simplex_grid_min3(var, 1e-3);
    (void)arg;
    CHECK(var(rep.weights.values()) <= best + 1e-15);
  }
  SUBCASE("covariance is the population covariance") {
    const MatrixXd C = covariance(orthogonal_pair(0.1, 0.2));
    CHECK(C(0, 0) == doctest::Approx(0.01));
    CHECK(C(1, 1) == doctest::Approx(0.04));
    CHECK(std::abs(C(0, 1)) <= 1e-18);
  }
}

TEST_CASE("vol_rp") {
  SUBCASE("diagonal covariance") {
    const SolverReport r = solve_vol_rp(orthogonal_pair(0.1, 0.2));
    CHECK(r.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(r.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  }
  SUBCASE("identical assets") {
    MatrixXd r(5, 2);
    r.col(0) = vec({0.01, -0.02, 0.03, 0.0, -0.01});
    r.col(1) = r.col(0);
    CHECK(inf_dist(solve_vol_rp(ScenarioMatrix(r)).weights.values(), vec({0.5, 0.5})) <= 1e-8);
  }
  SUBCASE("random market has equal volatility contributions") {
    for (int k = 0; k < 5; ++k) {
      const MatrixXd R = oracle::random_returns(5, 60, 90 + k);
      const VectorXd x = solve_vol_rp(ScenarioMatrix(R)).weights.values();
      const MatrixXd D = R.rowwise() - R.colwise().mean();
      const MatrixXd S = D.transpose() * D / 60.0;
      const VectorXd c = x.cwiseProduct(S * x);
      CHECK((c.maxCoeff() - c.minCoeff()) / c.mean() <= 1e-6);
    }
  }
  SUBCASE("a zero-variance asset is rejected") {
    MatrixXd r(3, 2);
    r << 0.01, 0.25, -0.02, 0.25, 0.01, 0.25;
    CHECK_THROWS_AS(solve_vol_rp(ScenarioMatrix(r)), InputError);
  }
}

TEST_CASE("equal weights") {
  CHECK(solve_ew(4).weights.values() == VectorXd::Constant(4, 0.25));
  CHECK(solve_ew(1).weights.values() == VectorXd::Ones(1));
  CHECK_THROWS_AS(solve_ew(0), InputError);
  const MatrixXd R = oracle::random_returns(4, 30, 14);
  const SolverReport r = solve_ew(ScenarioMatrix(R));
  const VectorXd dev = (oracle::rc_shares(R, VectorXd::Constant(4, 0.25)).array() - 0.25).abs();
  CHECK(r.mean_abs_dev == doctest::Approx(dev.mean()).epsilon(1e-10));
  CHECK(r.max_abs_dev == doctest::Approx(dev.maxCoeff()).epsilon(1e-10));
  CHECK(r.mean_abs_dev > 0.0);
}

TEST_CASE("ordering and uniqueness") {
  for (int k = 0; k < 10; ++k) {
    const int n = 2 + k % 4;
    const ScenarioMatrix scn(oracle::random_returns(n, 20 + k, 1000 + k));
    const double lo = solve_min_mad(scn).mad_value;
    const double hi = solve_ew(scn).mad_value;
    std::vector<VectorXd> sols;
    for (Method m : {Method::log_obj, Method::log_constr, Method::ls_rel, Method::ls_abs}) {
      const SolverReport r = solve(scn, m);
      CHECK(lo <= r.mad_value + 1e-8);
      CHECK(r.mad_value <= hi + 1e-8);
      CHECK(r.max_abs_dev <= 1e-3);
      sols.push_back(r.weights.values());
    }
    for (std::size_t j = 1; j < sols.size(); ++j) CHECK(inf_dist(sols[0], sols[j]) <= 1e-3);
  }
}

TEST_CASE("scale invariance of the log formulations") {
  const ScenarioMatrix scn(oracle::random_returns(4, 25, 33));
  for (Method m : {Method::log_obj, Method::log_constr}) {
    const SolverReport a = solve(scn, m);
    const SolverReport b = solve(scn.scaled(3.0), m);
    CHECK(inf_dist(a.weights.values(), b.weights.values()) <= 1e-6);
    CHECK(b.mad_value == doctest::Approx(3.0 * a.mad_value).epsilon(1e-6));
  }
}

TEST_CASE("degenerate markets are rejected") {
  SUBCASE("exact hedge") {
    MatrixXd r(4, 3);
    r << 0.01, -0.01, 0.02, -0.01, 0.01, 0.01, 0.02, -0.02, -0.03, -0.02, 0.02, 0.0;
    CHECK_THROWS_AS(require_nondegenerate(ScenarioMatrix(r)), SolveFailure);
    CHECK_THROWS_AS(solve_log_obj(ScenarioMatrix(r)), SolveFailure);
    CHECK_THROWS_AS(solve_ls_rel(ScenarioMatrix(r)), SolveFailure);
  }
  SUBCASE("constant asset") {
    MatrixXd r(3, 2);
    r << 0.01, 0.25, -0.02, 0.25, 0.01, 0.25;
    CHECK_THROWS_AS(solve_log_constr(ScenarioMatrix(r)), SolveFailure);
  }
  SUBCASE("duplicated asset is still solvable") {
    MatrixXd r = oracle::random_returns(2, 20, 3);
    MatrixXd d(20, 3);
    d << r, r.col(0);
    const SolverReport rep = solve_log_constr(ScenarioMatrix(d));
    CHECK(rep.weights[0] == doctest::Approx(rep.weights[2]).epsilon(1e-6));
    CHECK(rep.max_abs_dev <= 1e-3);
  }
  SUBCASE("nondegenerate market passes") {
    CHECK_NOTHROW(require_nondegenerate(ScenarioMatrix(oracle::random_returns(3, 20, 2))));
  }
}

TEST_CASE("dispatch records a wall time") {
  const SolverReport r = solve(symmetric_pair(), Method::ew);
  CHECK(r.method == Method::ew);
  CHECK(r.wall_time >= 0.0);
  CHECK(mad_rp_methods().size() == 7);
}
