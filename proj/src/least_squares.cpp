#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "madrp/bench.hpp"
#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
#include "solver_common.hpp"

namespace madrp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum class Objective { relative, pairwise };

// Risk contributions of a smoothed MAD, |u| ~ u^2 / sqrt(u^2 + eps^2), in the
// softmax parametrisation x = softmax(z).
class SmoothedModel {
 public:
  SmoothedModel(const ScenarioMatrix& scn, Objective kind, double ref_mad)
      : D_(scn.deviations()),
        n_(scn.num_assets()),
        inv_t_(1.0 / static_cast<double>(scn.num_scenarios())),
        kind_(kind),
        ref_mad_(ref_mad) {}

  Index num_residuals() const {
    return kind_ == Objective::relative ? n_ : n_ * (n_ - 1) / 2;
  }

  static VectorXd softmax(const VectorXd& z) {
    const VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
    return e / e.sum();
  }

  void evaluate(const VectorXd& z, double eps, VectorXd& r, MatrixXd* J) const {
    const VectorXd x = softmax(z);
    const VectorXd u = D_ * x;
    const VectorXd root = (u.array().square() + eps * eps).sqrt().matrix();
    const VectorXd phi = u.cwiseQuotient(root);
    const VectorXd g = D_.transpose() * phi * inv_t_;
    const VectorXd rc = x.cwiseProduct(g);
    const double M = x.dot(g);
    const double inv_n = 1.0 / static_cast<double>(n_);

    r.resize(num_residuals());
    if (kind_ == Objective::relative) {
      r = rc / M - VectorXd::Constant(n_, inv_n);
    } else {
      Index k = 0;
      for (Index i = 0; i < n_; ++i) {
        for (Index j = i + 1; j < n_; ++j) r[k++] = std::sqrt(2.0) * (rc[i] - rc[j]) / ref_mad_;
      }
    }
    if (J == nullptr) return;

    const VectorXd dphi = (eps * eps) * root.array().cube().inverse().matrix();
    const MatrixXd Hs = D_.transpose() * dphi.asDiagonal() * D_ * inv_t_;
    MatrixXd Jrc = x.asDiagonal() * Hs;
    Jrc.diagonal() += g;
    MatrixXd Jx;
    if (kind_ == Objective::relative) {
      const VectorXd dM = g + Hs * x;
      Jx = Jrc / M - (rc / (M * M)) * dM.transpose();
    } else {
      Jx.resize(num_residuals(), n_);
      Index k = 0;
      for (Index i = 0; i < n_; ++i) {
        for (Index j = i + 1; j < n_; ++j) {
          Jx.row(k++) = std::sqrt(2.0) * (Jrc.row(i) - Jrc.row(j)) / ref_mad_;
        }
      }
    }
    MatrixXd dxdz = -x * x.transpose();
    dxdz.diagonal() += x;
    *J = Jx * dxdz;
  }

  VectorXd smoothed_signs(const VectorXd& z, double eps) const {
    const VectorXd u = D_ * softmax(z);
    return u.cwiseQuotient((u.array().square() + eps * eps).sqrt().matrix());
  }

 private:
  const MatrixXd& D_;
  Index n_;
  double inv_t_;
  Objective kind_;
  double ref_mad_;
};

// Levenberg-Marquardt; returns true when it stopped on a stationarity or
// stagnation test rather than the iteration cap.
bool levenberg_marquardt(const SmoothedModel& model, double eps, VectorXd& z, int max_iter) {
  VectorXd r;
  MatrixXd J;
  model.evaluate(z, eps, r, &J);
  double cost = 0.5 * r.squaredNorm();
  double nu = 1e-3;
  int flat = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (cost <= 1e-34) return true;
    const MatrixXd A = J.transpose() * J;
    const VectorXd grad = J.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= 1e-18) return true;
    const double floor = 1e-15 * std::max(A.trace(), 1e-300);
    MatrixXd Ad = A;
    Ad.diagonal() += nu * (A.diagonal().array() + floor).matrix();
    const VectorXd step = Ad.ldlt().solve(-grad);
    const VectorXd zn = z + step;
    VectorXd rn;
    model.evaluate(zn, eps, rn, nullptr);
    const double cn = 0.5 * rn.squaredNorm();
    if (std::isfinite(cn) && cn < cost) {
      flat = (cost - cn) <= 1e-12 * cost ? flat + 1 : 0;
      z = zn;
      cost = cn;
      model.evaluate(z, eps, r, &J);
      nu = std::max(nu / 3.0, 1e-15);
      if (flat >= 3) return true;
    } else {
      nu *= 4.0;
      if (nu > 1e16) return true;
    }
  }
  return false;
}

double certified_f(const ScenarioMatrix& scn, const VectorXd& x) {
  if (!(mad(scn, x) > 0.0)) return std::numeric_limits<double>::infinity();
  return accuracy_diagnostics(scn, x).f_value;
}

std::vector<VectorXd> start_points(const ScenarioMatrix& scn, const SolverOptions& opts) {
  const Index n = scn.num_assets();
  std::vector<VectorXd> starts;
  starts.push_back(VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
  const VectorXd m = asset_mads(scn);
  if (is_additive(scn, 1e-12).additive && m.minCoeff() > 0.0) {
    starts.push_back(closed_form_rp(scn).values());
  }
  std::mt19937_64 rng(opts.seed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  while (static_cast<int>(starts.size()) < std::max(opts.restarts, 1)) {
    VectorXd w(n);
    for (Index i = 0; i < n; ++i) w[i] = std::max(gamma(rng), 1e-6);
    starts.push_back(w / w.sum());
  }
  starts.resize(static_cast<std::size_t>(std::max(opts.restarts, 1)));
  return starts;
}

SolverReport solve_least_squares(const ScenarioMatrix& scn, Objective kind, Method method,
                                 const SolverOptions& opts) {
  const Index n = scn.num_assets();
  if (n < 2) throw InputError("least-squares risk parity needs at least two assets");
  require_nondegenerate(scn);
  const double certify = opts.tol * opts.tol;

  VectorXd best;
  double best_f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  for (const VectorXd& x0 : start_points(scn, opts)) {
    VectorXd x = x0;
    double f = certified_f(scn, x);
    if (f > certify && n > 1) {
      const double ref = mad(scn, x0);
      const SmoothedModel model(scn, kind, ref);
      const double spread = (scn.deviations() * x0).cwiseAbs().maxCoeff();
      VectorXd z = x0.array().log().matrix();
      double eps = spread;
      for (int stage = 1; stage <= 12; ++stage) {
        eps *= 0.1;
        levenberg_marquardt(model, eps, z, opts.max_iter);
        iterations += 1;
      }
      x = SmoothedModel::softmax(z);
      if (opts.refine) {
        const VectorXd hint = model.smoothed_signs(z, eps);
        const detail::RefineResult ref_res = detail::refine_rp(scn, x, &hint);
        if (ref_res.improved) x = ref_res.x;
      }
      f = certified_f(scn, x);
    }
    if (f < best_f) {
      best_f = f;
      best = x;
    }
    if (best_f <= certify) break;
  }

  SolveStatus st;
  st.iterations = iterations;
  st.kkt_residual = std::sqrt(best_f);
  if (best_f <= certify) {
    st.code = SolveStatusCode::optimal;
  } else {
    st.code = SolveStatusCode::iteration_limit;
    st.message = "no restart reached a certified risk parity point";
  }
  return detail::make_report(scn, method, best, st);
}

}  // namespace

SolverReport solve_ls_rel(const ScenarioMatrix& scn, const SolverOptions& opts) {
  return solve_least_squares(scn, Objective::relative, Method::ls_rel, opts);
}

SolverReport solve_ls_abs(const ScenarioMatrix& scn, const SolverOptions& opts) {
  return solve_least_squares(scn, Objective::pairwise, Method::ls_abs, opts);
}

}  // namespace madrp
