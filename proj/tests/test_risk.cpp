#include <doctest.h>

#include <random>

#include "madrp/error.hpp"
#include "madrp/risk.hpp"
#include "oracles.hpp"

using namespace madrp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ScenarioMatrix two_point(double d) {
  MatrixXd r(2, 1);
  r << d, -d;
  return ScenarioMatrix(r);
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("portfolio weights invariants") {
  CHECK(PortfolioWeights::equal(4).values() == VectorXd::Constant(4, 0.25));
  CHECK(PortfolioWeights::equal(1).values()[0] == 1.0);
  CHECK_THROWS_AS(PortfolioWeights::on_simplex(vec({0.5, 0.6})), InputError);
  CHECK_THROWS_AS(PortfolioWeights::on_simplex(vec({1.2, -0.2})), InputError);
  CHECK_THROWS_AS(PortfolioWeights::interior(vec({1.0, 0.0})), InputError);
  const PortfolioWeights w = PortfolioWeights::interior(vec({2.0, 6.0}));
  CHECK_FALSE(w.normalized());
  const PortfolioWeights n = w.normalize();
  CHECK(n.normalized());
  CHECK(n[0] == 0.25);
}

TEST_CASE("mad, msad and volatility on a symmetric two-point asset") {
  const ScenarioMatrix scn = two_point(0.02);
  CHECK(mad(scn, vec({1.0})) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(msad(scn, vec({1.0})) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(volatility(scn, vec({1.0})) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(mad(scn, vec({0.0})) == 0.0);
}

TEST_CASE("msad vanishes when every deviation is negative") {
  // Zero vector probe: the positive part is empty.
  const ScenarioMatrix scn(oracle::random_returns(3, 10, 4));
  CHECK(msad(scn, VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("dimension mismatch is rejected") {
  const ScenarioMatrix scn(oracle::random_returns(3, 10, 4));
  CHECK_THROWS_AS(mad(scn, VectorXd::Ones(2)), InputError);
  CHECK_THROWS_AS(msad(scn, VectorXd::Ones(4)), InputError);
  CHECK_THROWS_AS(volatility(scn, VectorXd::Ones(2)), InputError);
  CHECK_THROWS_AS(risk_contributions(scn, VectorXd::Ones(2)), InputError);
}

TEST_CASE("mad matches the long-double oracle") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const MatrixXd R = oracle::random_returns(5, 40, 100 + k);
    const ScenarioMatrix scn(R);
    const VectorXd x = oracle::random_simplex_point(5, rng);
    CHECK(mad(scn, x) == doctest::Approx(oracle::mad(R, x)).epsilon(1e-13));
    CHECK(msad(scn, x) == doctest::Approx(oracle::msad(R, x)).epsilon(1e-13));
    CHECK(volatility(scn, x) == doctest::Approx(oracle::volatility(R, x)).epsilon(1e-12));
  }
}

TEST_CASE("mad is exactly twice msad") {
  for (int k = 0; k < 50; ++k) {
    const ScenarioMatrix scn(oracle::random_returns(4, 23 + k, 7 + k));
    std::mt19937_64 rng(k);
    const VectorXd x = oracle::random_simplex_point(4, rng);
    CHECK(mad(scn, x) == 2.0 * msad(scn, x));
  }
}

TEST_CASE("mad of a comonotone pair is additive") {
  // Asset MADs 0.02 and 0.01 by construction.
  MatrixXd r(4, 2);
  r << 0.02, 0.01, -0.02, -0.01, 0.02, 0.01, -0.02, -0.01;
  const ScenarioMatrix scn(r);
  CHECK(asset_mads(scn)[0] == doctest::Approx(0.02));
  CHECK(asset_mads(scn)[1] == doctest::Approx(0.01));
  CHECK(mad(scn, vec({0.5, 0.5})) == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(oracle::mad(r, vec({0.5, 0.5})) == doctest::Approx(0.015).epsilon(1e-14));
}

TEST_CASE("subgradient equals the gradient away from ties") {
  const MatrixXd R = oracle::random_returns(4, 30, 8);
  const ScenarioMatrix scn(R);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const VectorXd x = oracle::random_simplex_point(4, rng);
    const MadSubgradient sub = mad_subgradient(scn, x);
    REQUIRE(sub.selection.tie_scenarios.empty());
    const VectorXd fd = oracle::central_difference(
        [&](const VectorXd& y) { return oracle::mad(R, y); }, x, 1e-7);
    CHECK((sub.g - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
    for (Index t = 0; t < 30; ++t) CHECK(std::abs(sub.selection.s[t]) == 1.0);
  }
}

TEST_CASE("one-asset subgradient is the asset MAD") {
  const ScenarioMatrix scn(oracle::random_returns(1, 25, 2));
  const MadSubgradient sub = mad_subgradient(scn, vec({0.7}));
  CHECK(sub.g[0] == doctest::Approx(mad(scn, vec({1.0}))).epsilon(1e-13));
}

TEST_CASE("tie bookkeeping") {
  // x = (1, 1) makes scenario 0 a tie: deviations (+d, -d).
  MatrixXd r(3, 2);
  r << 0.01, -0.01, 0.02, 0.03, -0.03, -0.02;
  const ScenarioMatrix scn(r);
  const VectorXd x = vec({0.5, 0.5});
  const VectorXd u = portfolio_deviations(scn, x);
  REQUIRE(std::abs(u[0]) <= 1e-12 * u.cwiseAbs().maxCoeff());
  const SubgradientSelection zero = select_subgradient(scn, x, TieRule::zero);
  REQUIRE(zero.tie_scenarios == std::vector<Index>{0});
  CHECK(zero.s[0] == 0.0);
  CHECK(select_subgradient(scn, x, TieRule::plus).s[0] == 1.0);
  CHECK(select_subgradient(scn, x, TieRule::minus).s[0] == -1.0);
  const SubgradientSelection bal = select_subgradient(scn, x, TieRule::balanced);
  CHECK(std::abs(bal.s[0]) <= 1.0);
  for (TieRule rule : {TieRule::zero, TieRule::plus, TieRule::minus, TieRule::balanced}) {
    const RiskContributionVector rc = risk_contributions(scn, x, rule);
    CHECK(rc.total == doctest::Approx(mad(scn, x)).epsilon(1e-12));
  }
}

TEST_CASE("balanced tie rule equalises contributions when it can") {
  // Symmetric pair with a tie at EW: any s_0 in [-1, 1] is a subgradient and
  // the balanced rule must pick one that makes the contributions equal.
  MatrixXd r(4, 2);
  r << 0.03, -0.03, 0.01, 0.02, 0.02, 0.01, -0.06, 0.0;
  const ScenarioMatrix scn(r);
  const VectorXd x = vec({0.5, 0.5});
  const RiskContributionVector rc = risk_contributions(scn, x, TieRule::balanced);
  const RiskContributionVector rz = risk_contributions(scn, x, TieRule::zero);
  const double m = mad(scn, x);
  const double f_bal = ((rc.rc / m).array() - 0.5).square().sum();
  const double f_zero = ((rz.rc / m).array() - 0.5).square().sum();
  CHECK(f_bal <= f_zero + 1e-15);
}

TEST_CASE("risk contributions") {
  const MatrixXd R = oracle::random_returns(3, 20, 12);
  const ScenarioMatrix scn(R);
  SUBCASE("single asset holds all the risk") {
    const RiskContributionVector rc = risk_contributions(scn, VectorXd::Unit(3, 1));
    CHECK(rc.rc[1] == doctest::Approx(asset_mads(scn)[1]).epsilon(1e-13));
    CHECK(rc.rc[0] == 0.0);
    CHECK(rc.rc[2] == 0.0);
  }
  SUBCASE("identical columns share risk equally") {
    MatrixXd twin(20, 2);
    twin.col(0) = R.col(0);
    twin.col(1) = R.col(0);
    const RiskContributionVector rc = risk_contributions(ScenarioMatrix(twin), vec({0.5, 0.5}));
    CHECK(rc.rc[0] == rc.rc[1]);
  }
  SUBCASE("euler identity") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      const VectorXd x = oracle::random_simplex_point(3, rng);
      CHECK(std::abs(risk_contributions(scn, x).total - mad(scn, x)) <= 1e-10);
    }
  }
}

TEST_CASE("additivity detector") {
  SUBCASE("comonotone market is additive") {
    const std::vector<double> scales{1.0, 2.0, 0.5};
    CHECK(is_additive(synth_comonotone(3, 40, scales, 3)).additive);
  }
  SUBCASE("anticorrelated pair has a witness") {
    MatrixXd r(2, 2);
    r << 0.01, -0.01, -0.01, 0.01;
    const AdditivityReport rep = is_additive(ScenarioMatrix(r));
    CHECK_FALSE(rep.additive);
    REQUIRE(rep.witness);
    CHECK(rep.witness->product < 0.0);
    CHECK(rep.witness->asset_i == 0);
    CHECK(rep.witness->asset_j == 1);
  }
  SUBCASE("a constant asset gives exactly zero products") {
    MatrixXd r(3, 2);
    r << 0.01, 0.25, -0.02, 0.25, 0.01, 0.25;
    const ScenarioMatrix scn(r);
    CHECK(is_additive(scn, 0.0).additive);
    CHECK(is_additive(scn, 1e-12).additive);
  }
}

TEST_CASE("closed form risk parity") {
  SUBCASE("asset MADs 0.02 and 0.01") {
    MatrixXd r(4, 2);
    r << 0.02, 0.01, -0.02, -0.01, 0.02, 0.01, -0.02, -0.01;
    const ScenarioMatrix scn(r);
    const PortfolioWeights w = closed_form_rp(scn);
    CHECK(w[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const RiskContributionVector rc = risk_contributions(scn, w.values());
    CHECK(rc.rc[0] == doctest::Approx(rc.rc[1]).epsilon(1e-14));
  }
  SUBCASE("equal MADs give equal weights") {
    const std::vector<double> scales{1.0, 1.0, 1.0};
    const PortfolioWeights w = closed_form_rp(synth_comonotone(3, 30, scales, 5));
    CHECK((w.values().array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("a constant asset is rejected") {
    MatrixXd r(3, 2);
    r << 0.01, 0.25, -0.02, 0.25, 0.01, 0.25;
    CHECK_THROWS_AS(closed_form_rp(ScenarioMatrix(r)), InputError);
  }
  SUBCASE("non-additive market is rejected") {
    CHECK_THROWS_AS(closed_form_rp(ScenarioMatrix(oracle::random_returns(3, 30, 1))), InputError);
  }
}

TEST_CASE("coherent companion") {
  SUBCASE("zero-mean returns") {
    const ScenarioMatrix scn = two_point(0.03);
    CHECK(rho_mad(scn, vec({1.0})) == doctest::Approx(mad(scn, vec({1.0}))).epsilon(1e-15));
  }
  SUBCASE("constant return c") {
    MatrixXd r = MatrixXd::Constant(5, 1, 0.004);
    CHECK(rho_mad(ScenarioMatrix(r), vec({1.0})) == doctest::Approx(-0.004).epsilon(1e-15));
  }
  SUBCASE("strictly above minus the mean for nonconstant returns") {
    const ScenarioMatrix scn(oracle::random_returns(3, 30, 2));
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = oracle::random_simplex_point(3, rng);
      CHECK(rho_mad(scn, x) > -scn.means().dot(x));
    }
  }
}
