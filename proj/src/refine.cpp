#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "madrp/bench.hpp"
#include "madrp/solvers.hpp"

namespace madrp::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double balanced_f(const ScenarioMatrix& scn, const VectorXd& x) {
  if (!(x.minCoeff() >= 0.0) || !(mad(scn, x) > 0.0)) return std::numeric_limits<double>::infinity();
  return accuracy_diagnostics(scn, x).f_value;
}

struct NewtonState {
  VectorXd x;
  VectorXd s_tie;
  double lambda = 0.0;
};

// Newton's method on x_i (c_i + D_K^T s / T)_i = lambda, sum x = 1, D_K x = 0.
bool newton_solve(const MatrixXd& D, const VectorXd& signs, const std::vector<Index>& ties,
                  NewtonState& st) {
  const Index T = D.rows();
  const Index n = D.cols();
  const auto k = static_cast<Index>(ties.size());
  const double inv_t = 1.0 / static_cast<double>(T);
  VectorXd fixed = VectorXd::Zero(n);
  {
    VectorXd s = signs;
    for (Index t : ties) s[t] = 0.0;
    fixed = D.transpose() * s * inv_t;
  }
  MatrixXd DK(k, n);
  for (Index j = 0; j < k; ++j) DK.row(j) = D.row(ties[static_cast<std::size_t>(j)]);
  const Index dim = n + k + 1;

  auto residual = [&](const NewtonState& z) {
    VectorXd F(dim);
    const VectorXd g = fixed + DK.transpose() * z.s_tie * inv_t;
    F.head(n) = z.x.cwiseProduct(g).array() - z.lambda;
    F[n] = z.x.sum() - 1.0;
    F.tail(k) = DK * z.x;
    return F;
  };

  VectorXd F = residual(st);
  double norm = F.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < 40; ++iter) {
    const VectorXd g = fixed + DK.transpose() * st.s_tie * inv_t;
    MatrixXd J = MatrixXd::Zero(dim, dim);
    J.topLeftCorner(n, n).diagonal() = g;
    J.block(0, n, n, k) = st.x.asDiagonal() * DK.transpose() * inv_t;
    J.block(0, n + k, n, 1).setConstant(-1.0);
    J.block(n, 0, 1, n).setOnes();
    J.block(n + 1, 0, k, n) = DK;
    const VectorXd step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) return false;
    NewtonState next = st;
    next.x += step.head(n);
    next.s_tie += step.segment(n, k);
    next.lambda += step[n + k];
    const VectorXd Fn = residual(next);
    const double nn = Fn.cwiseAbs().maxCoeff();
    if (!(nn < norm)) break;
    st = std::move(next);
    F = Fn;
    norm = nn;
    if (norm <= 1e-17 * std::max(1.0, std::abs(st.lambda) * 1e3)) break;
  }
  return std::isfinite(norm) && norm <= 1e-9 * std::max(std::abs(st.lambda), 1e-300);
}

}  // namespace

RefineResult refine_rp(const ScenarioMatrix& scn, const VectorXd& x0,
                       const VectorXd* sign_hint) {
  RefineResult out{x0, false};
  const MatrixXd& D = scn.deviations();
  const Index T = scn.num_scenarios();
  const Index n = scn.num_assets();
  if (n < 2 || x0.size() != n || !(x0.minCoeff() > 0.0)) return out;

  const VectorXd u0 = D * x0;
  const double scale = u0.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return out;

  VectorXd signs(T);
  std::vector<Index> ties;
  std::vector<double> tie_init;
  for (Index t = 0; t < T; ++t) {
    signs[t] = u0[t] >= 0.0 ? 1.0 : -1.0;
    if (std::abs(u0[t]) <= 1e-6 * scale) {
      ties.push_back(t);
      tie_init.push_back(sign_hint ? std::clamp((*sign_hint)[t], -1.0, 1.0) : 0.0);
    }
  }

  NewtonState st;
  st.x = x0 / x0.sum();
  st.s_tie = Eigen::Map<VectorXd>(tie_init.data(), static_cast<Index>(tie_init.size()));
  {
    const VectorXd g = D.transpose() * [&] {
      VectorXd s = signs;
      for (std::size_t j = 0; j < ties.size(); ++j) s[ties[j]] = tie_init[j];
      return s;
    }() / static_cast<double>(T);
    st.lambda = st.x.dot(g) / static_cast<double>(n);
  }

  for (Index round = 0; round < 2 * T + 10; ++round) {
    NewtonState trial = st;
    if (!newton_solve(D, signs, ties, trial)) return out;
    if (!(trial.x.minCoeff() > 0.0)) return out;

    // Tie entries outside [-1, 1]: release the worst one with its sign fixed.
    Index worst = -1;
    double worst_val = 1.0 + 1e-12;
    for (std::size_t j = 0; j < ties.size(); ++j) {
      const double v = std::abs(trial.s_tie[static_cast<Index>(j)]);
      if (v > worst_val) {
        worst_val = v;
        worst = static_cast<Index>(j);
      }
    }
    if (worst >= 0) {
      signs[ties[static_cast<std::size_t>(worst)]] = trial.s_tie[worst] > 0 ? 1.0 : -1.0;
      ties.erase(ties.begin() + worst);
      std::vector<double> rest;
      for (Index j = 0; j < trial.s_tie.size(); ++j) {
        if (j != worst) rest.push_back(trial.s_tie[j]);
      }
      st = trial;
      st.s_tie = Eigen::Map<VectorXd>(rest.data(), static_cast<Index>(rest.size()));
      continue;
    }

    // Frozen signs contradicted by the new point: pin those scenarios.
    const VectorXd u = D * trial.x;
    const double sc = u.cwiseAbs().maxCoeff();
    std::vector<Index> flipped;
    for (Index t = 0; t < T; ++t) {
      if (std::find(ties.begin(), ties.end(), t) != ties.end()) continue;
      if (signs[t] * u[t] < -kTieRelTol * sc) flipped.push_back(t);
    }
    if (!flipped.empty()) {
      std::vector<double> s_vals(trial.s_tie.data(), trial.s_tie.data() + trial.s_tie.size());
      for (Index t : flipped) {
        ties.push_back(t);
        s_vals.push_back(signs[t]);
      }
      st = trial;
      st.s_tie = Eigen::Map<VectorXd>(s_vals.data(), static_cast<Index>(s_vals.size()));
      continue;
    }

    const VectorXd x = trial.x / trial.x.sum();
    if (balanced_f(scn, x) <= balanced_f(scn, x0 / x0.sum())) {
      out.x = x;
      out.improved = true;
    }
    return out;
  }
  return out;
}

void fill_diagnostics(const ScenarioMatrix& scn, SolverReport& report) {
  report.mad_value = mad(scn, report.weights.values());
  if (report.mad_value > 0.0) {
    const AccuracyDiagnostics acc = accuracy_diagnostics(scn, report.weights.values());
    report.f_value = acc.f_value;
    report.mean_abs_dev = acc.mean_abs_dev;
    report.max_abs_dev = acc.max_abs_dev;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.f_value = report.mean_abs_dev = report.max_abs_dev = nan;
  }
}

}  // namespace madrp::detail
