#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
#include "solver_common.hpp"

namespace madrp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct MinMadSolution {
  VectorXd x;
  double value = 0.0;  // MAD at x
  SolveStatus status;
};

// Epigraph LP on deviations rescaled so the riskiest asset has MAD 1.
MinMadSolution min_mad_lp(const ScenarioMatrix& scn, double tol, int max_iter) {
  const Index n = scn.num_assets();
  const Index T = scn.num_scenarios();
  const VectorXd asset = asset_mads(scn);
  MinMadSolution out;

  for (Index i = 0; i < n; ++i) {
    if (asset[i] == 0.0) {
      out.x = VectorXd::Unit(n, i);
      out.value = 0.0;
      out.status.message = "asset " + std::to_string(i) + " is riskless";
      return out;
    }
  }
  const double kappa = 1.0 / asset.maxCoeff();
  const MatrixXd D = scn.deviations() * kappa;

  LinearProgram lp;
  lp.objective = VectorXd::Zero(n + T);
  lp.objective.tail(T).setConstant(1.0 / static_cast<double>(T));
  lp.ineq_matrix = MatrixXd::Zero(2 * T, n + T);
  lp.ineq_matrix.topLeftCorner(T, n) = D;
  lp.ineq_matrix.bottomLeftCorner(T, n) = -D;
  lp.ineq_matrix.topRightCorner(T, T) = -MatrixXd::Identity(T, T);
  lp.ineq_matrix.bottomRightCorner(T, T) = -MatrixXd::Identity(T, T);
  lp.ineq_rhs = VectorXd::Zero(2 * T);
  lp.eq_matrix = MatrixXd::Zero(1, n + T);
  lp.eq_matrix.leftCols(n).setOnes();
  lp.eq_rhs = VectorXd::Ones(1);
  lp.lower = VectorXd::Zero(n + T);

  const LpResult res = solve_lp(lp, tol, max_iter);
  out.status = res.status;
  if (!res.status.optimal()) return out;
  VectorXd x = res.x.head(n).cwiseMax(0.0);
  out.x = x / x.sum();
  out.value = mad(scn, out.x);
  return out;
}

}  // namespace

void require_nondegenerate(const ScenarioMatrix& scn) {
  const MinMadSolution sol = min_mad_lp(scn, 1e-9, 200);
  if (!sol.status.optimal()) throw SolveFailure(sol.status);
  const double reference = asset_mads(scn).maxCoeff();
  if (!(sol.value > 1e-8 * reference)) {
    SolveStatus st;
    st.code = SolveStatusCode::infeasible;
    st.message =
        "degenerate market: a nonzero long-only portfolio has zero MAD (minimum over the "
        "simplex is " + format_double(sol.value) +
        "), so the positivity hypothesis behind a unique MAD risk parity portfolio fails";
    throw SolveFailure(st);
  }
}

SolverReport solve_min_mad(const ScenarioMatrix& scn, const SolverOptions& opts) {
  const MinMadSolution sol = min_mad_lp(scn, std::min(opts.tol, 1e-9), opts.max_iter);
  if (!sol.status.optimal()) throw SolveFailure(sol.status);
  return detail::make_report(scn, Method::min_mad, sol.x, sol.status);
}

Eigen::MatrixXd covariance(const ScenarioMatrix& scn) {
  const MatrixXd& D = scn.deviations();
  return D.transpose() * D / static_cast<double>(scn.num_scenarios());
}

SolverReport solve_min_var(const ScenarioMatrix& scn, const SolverOptions& opts) {
  const Index n = scn.num_assets();
  const MatrixXd S = covariance(scn);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double L = eig.eigenvalues().maxCoeff();
  VectorXd x = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  SolveStatus st;
  if (!(L > 0.0)) {
    SolverReport report = detail::make_report(scn, Method::min_var, x, st);
    report.unique_optimum = n == 1;
    return report;
  }

  auto residual = [&](const VectorXd& v) {
    return (v - project_simplex(v - S * v / L)).cwiseAbs().maxCoeff();
  };

  // Accelerated projected gradient with adaptive restart.
  VectorXd y = x;
  double t = 1.0;
  double f = x.dot(S * x);
  const int limit = 100 * opts.max_iter;
  int iter = 0;
  for (; iter < limit; ++iter) {
    const VectorXd xn = project_simplex(y - S * y / L);
    const double fn = xn.dot(S * xn);
    if (fn > f) {
      y = x;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = xn;
    f = fn;
    t = tn;
    if (residual(x) <= 1e-3 * opts.tol) break;
  }

  // Equality-constrained solve on the detected support.
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i) {
    if (x[i] > 1e-9) support.push_back(i);
  }
  const auto k = static_cast<Index>(support.size());
  MatrixXd K = MatrixXd::Zero(k + 1, k + 1);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) K(a, b) = S(support[a], support[b]);
    K(a, k) = -1.0;
    K(k, a) = 1.0;
  }
  VectorXd rhs = VectorXd::Zero(k + 1);
  rhs[k] = 1.0;
  const VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  VectorXd polished = VectorXd::Zero(n);
  for (Index a = 0; a < k; ++a) polished[support[a]] = sol[a];
  if (polished.allFinite() && polished.minCoeff() >= 0.0 &&
      std::abs(polished.sum() - 1.0) < 1e-12 &&
      polished.dot(S * polished) <= f * (1.0 + 1e-12) + 1e-300 &&
      residual(polished) <= residual(x)) {
    x = polished;
  }

  st.iterations = iter;
  st.kkt_residual = residual(x);
  if (st.kkt_residual > opts.tol) {
    st.code = SolveStatusCode::iteration_limit;
    st.message = "projected gradient did not reach the KKT tolerance";
  }
  SolverReport report = detail::make_report(scn, Method::min_var, x, st);

  // Flat directions of the objective inside the optimal face.
  if (k > 1) {
    MatrixXd Sk(k, k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) Sk(a, b) = S(support[a], support[b]);
    }
    const VectorXd ones = VectorXd::Ones(k) / std::sqrt(static_cast<double>(k));
    const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(ones).householderQ();
    const MatrixXd Z = Q.rightCols(k - 1);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> face(Z.transpose() * Sk * Z,
                                                       Eigen::EigenvaluesOnly);
    report.unique_optimum = face.eigenvalues().minCoeff() > 1e-10 * L;
  }
  return report;
}

SolverReport solve_vol_rp(const ScenarioMatrix& scn, const SolverOptions& opts) {
  const Index n = scn.num_assets();
  const MatrixXd S = covariance(scn);
  for (Index i = 0; i < n; ++i) {
    if (!(S(i, i) > 0.0)) {
      throw InputError("asset " + std::to_string(i) +
                       " has zero variance; volatility risk parity is undefined");
    }
  }
  // y minimises 0.5 y^T S y - sum ln y, so y_i (S y)_i = 1 for every i.
  VectorXd y = S.diagonal().cwiseSqrt().cwiseInverse() / std::sqrt(static_cast<double>(n));
  auto value = [&](const VectorXd& v) {
    return v.minCoeff() <= 0.0 ? std::numeric_limits<double>::infinity()
                               : 0.5 * v.dot(S * v) - v.array().log().sum();
  };
  SolveStatus st;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const VectorXd grad = S * y - y.cwiseInverse();
    MatrixXd H = S;
    H.diagonal() += y.cwiseInverse().cwiseAbs2();
    const VectorXd step = -H.llt().solve(grad);
    const double dec = -grad.dot(step);
    if (!(dec > 1e-28 * static_cast<double>(n))) break;
    const double f0 = value(y);
    double alpha = 1.0;
    while (alpha > 1e-12 && !(value(y + alpha * step) <= f0 - 0.25 * alpha * dec)) alpha *= 0.5;
    if (alpha <= 1e-12) break;
    y += alpha * step;
  }
  st.iterations = iter;
  st.kkt_residual = (y.cwiseProduct(S * y).array() - 1.0).abs().maxCoeff();
  if (st.kkt_residual > std::max(opts.tol, 1e-10)) {
    st.code = SolveStatusCode::iteration_limit;
    st.message = "Newton iteration did not equalise volatility contributions";
  }
  return detail::make_report(scn, Method::vol_rp, y / y.sum(), st);
}

SolverReport solve_ew(Index n) {
  SolverReport report;
  report.method = Method::ew;
  report.weights = PortfolioWeights::equal(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.f_value = report.mad_value = report.mean_abs_dev = report.max_abs_dev = nan;
  return report;
}

SolverReport solve_ew(const ScenarioMatrix& scn) {
  const Index n = scn.num_assets();
  return detail::make_report(scn, Method::ew,
                             VectorXd::Constant(n, 1.0 / static_cast<double>(n)), {});
}

SolverReport solve_closed_form(const ScenarioMatrix& scn) {
  const PortfolioWeights w = closed_form_rp(scn);
  return detail::make_report(scn, Method::closed_form, w.values(), {});
}

}  // namespace madrp
