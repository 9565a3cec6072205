#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "madrp/error.hpp"
#include "madrp/optim.hpp"

namespace madrp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class BarrierProblem {
 public:
  explicit BarrierProblem(const AbsSumLogProblem& p)
      : p_(p),
        positivity_(p.log_weight <= 0.0 && !p.log_floor.has_value()),
        n_(p.rows.cols()),
        T_(p.rows.rows()) {}

  Index num_barrier_terms() const {
    return 2 * T_ + (p_.log_floor ? 1 : 0) + (positivity_ ? n_ : 0);
  }

  double log_sum(const VectorXd& x) const { return x.array().log().sum(); }

  // Original objective with y at its epigraph value.
  double objective(const VectorXd& x, const VectorXd& y) const {
    return p_.abs_weight * y.sum() - p_.log_weight * log_sum(x);
  }

  // Barrier function; +inf outside the domain.
  double value(const VectorXd& x, const VectorXd& y, double mu) const {
    if (x.minCoeff() <= 0.0) return kInf;
    const VectorXd u = p_.rows * x;
    double f = objective(x, y);
    for (Index t = 0; t < T_; ++t) {
      const double a = y[t] - u[t];
      const double b = y[t] + u[t];
      if (a <= 0.0 || b <= 0.0) return kInf;
      f -= mu * (std::log(a) + std::log(b));
    }
    if (p_.log_floor) {
      const double gap = log_sum(x) - *p_.log_floor;
      if (gap <= 0.0) return kInf;
      f -= mu * std::log(gap);
    }
    if (positivity_) f -= mu * log_sum(x);
    return f;
  }

  // Newton direction with the epigraph variables eliminated. Returns the
  // Newton decrement squared; `ok` is false when the system is singular.
  double direction(const VectorXd& x, const VectorXd& y, double mu, VectorXd& dx,
                   VectorXd& dy, bool& ok) const {
    const MatrixXd& D = p_.rows;
    const VectorXd u = D * x;
    const VectorXd inv_x = x.cwiseInverse();

    VectorXd gx = -p_.log_weight * inv_x;
    VectorXd diag = p_.log_weight * inv_x.cwiseAbs2();
    if (positivity_) {
      gx -= mu * inv_x;
      diag += mu * inv_x.cwiseAbs2();
    }
    VectorXd gy(T_);
    VectorXd yy(T_);
    VectorXd weight(T_);  // Schur complement weight 4 mu / (a^2 + b^2)
    VectorXd coupling(T_);  // h_t = coupling_t * d_t
    for (Index t = 0; t < T_; ++t) {
      const double a = y[t] - u[t];
      const double b = y[t] + u[t];
      const double ia = 1.0 / a;
      const double ib = 1.0 / b;
      gy[t] = p_.abs_weight - mu * (ia + ib);
      yy[t] = mu * (ia * ia + ib * ib);
      weight[t] = 4.0 * mu / (a * a + b * b);
      coupling[t] = mu * (ib * ib - ia * ia);
      gx += mu * (ia - ib) * D.row(t).transpose();
    }
    MatrixXd S = D.transpose() * weight.asDiagonal() * D;
    S.diagonal() += diag;
    if (p_.log_floor) {
      const double gap = log_sum(x) - *p_.log_floor;
      gx -= (mu / gap) * inv_x;
      S.noalias() += (mu / (gap * gap)) * inv_x * inv_x.transpose();
      S.diagonal() += (mu / gap) * inv_x.cwiseAbs2();
    }
    // r = g_x - sum_t h_t g_y / yy
    VectorXd r = gx;
    const VectorXd ratio = coupling.cwiseProduct(gy).cwiseQuotient(yy);
    r.noalias() -= D.transpose() * ratio;

    const Index p = p_.eq_matrix.rows();
    if (p == 0) {
      Eigen::LLT<MatrixXd> llt(S);
      if (llt.info() != Eigen::Success) {
        ok = false;
        return 0.0;
      }
      dx = -llt.solve(r);
    } else {
      MatrixXd K = MatrixXd::Zero(n_ + p, n_ + p);
      K.topLeftCorner(n_, n_) = S;
      K.topRightCorner(n_, p) = p_.eq_matrix.transpose();
      K.bottomLeftCorner(p, n_) = p_.eq_matrix;
      VectorXd rhs = VectorXd::Zero(n_ + p);
      rhs.head(n_) = -r;
      const VectorXd sol = K.fullPivLu().solve(rhs);
      dx = sol.head(n_);
    }
    dy.resize(T_);
    const VectorXd hdx = coupling.cwiseProduct(D * dx);
    for (Index t = 0; t < T_; ++t) dy[t] = -(gy[t] + hdx[t]) / yy[t];
    ok = dx.allFinite() && dy.allFinite();
    return -(gx.dot(dx) + gy.dot(dy));
  }

  VectorXd signs(const VectorXd& x, const VectorXd& y, double mu) const {
    const VectorXd u = p_.rows * x;
    VectorXd s(T_);
    for (Index t = 0; t < T_; ++t) {
      const double v = (mu / (y[t] - u[t]) - mu / (y[t] + u[t])) / p_.abs_weight;
      s[t] = std::clamp(v, -1.0, 1.0);
    }
    return s;
  }

 private:
  const AbsSumLogProblem& p_;
  bool positivity_;
  Index n_;
  Index T_;
};

void validate(const AbsSumLogProblem& p, const VectorXd& start) {
  const Index n = p.rows.cols();
  if (n == 0 || p.rows.rows() == 0) throw InputError("barrier problem is empty");
  if (start.size() != n) throw InputError("barrier start has the wrong length");
  if (!(p.abs_weight > 0.0)) throw InputError("abs_weight must be positive");
  if (p.log_weight < 0.0) throw InputError("log_weight must be nonnegative");
  if (p.eq_matrix.rows() > 0 &&
      (p.eq_matrix.cols() != n || p.eq_rhs.size() != p.eq_matrix.rows())) {
    throw InputError("barrier equality constraints have inconsistent dimensions");
  }
  if (!start.allFinite() || start.minCoeff() <= 0.0) {
    throw InputError("barrier start must be strictly positive");
  }
  if (p.log_floor && !(start.array().log().sum() > *p.log_floor)) {
    throw InputError("barrier start must lie strictly above the log floor");
  }
  if (p.eq_matrix.rows() > 0) {
    const double res = (p.eq_matrix * start - p.eq_rhs).cwiseAbs().maxCoeff();
    if (res > 1e-10 * std::max(1.0, p.eq_rhs.cwiseAbs().maxCoeff())) {
      throw InputError("barrier start violates the equality constraints");
    }
  }
}

}  // namespace

BarrierResult solve_barrier(const AbsSumLogProblem& problem, const VectorXd& start,
                            const BarrierSchedule& schedule) {
  validate(problem, start);
  const BarrierProblem bp(problem);
  const auto m = static_cast<double>(bp.num_barrier_terms());

  VectorXd x = start;
  const VectorXd u0 = problem.rows * x;
  const double spread = u0.cwiseAbs().mean();
  VectorXd y = u0.cwiseAbs().array() + std::max(0.1 * spread, 1e-12 * (1.0 + spread));

  const double scale = std::max(problem.abs_weight * u0.cwiseAbs().sum() +
                                    problem.log_weight * static_cast<double>(x.size()),
                                std::numeric_limits<double>::min());
  double mu = schedule.initial > 0.0 ? schedule.initial : scale / m;

  BarrierResult result;
  result.status.code = SolveStatusCode::iteration_limit;
  int newton_total = 0;
  bool stalled = false;

  for (int outer = 0; outer < schedule.max_outer; ++outer) {
    bool centred = false;
    for (int k = 0; k < schedule.max_newton; ++k) {
      VectorXd dx, dy;
      bool ok = true;
      const double dec = bp.direction(x, y, mu, dx, dy, ok);
      ++newton_total;
      if (!ok) break;
      if (dec <= std::max(1e-10 * m * mu, 1e-15 * scale) || dec <= 0.0) {
        centred = true;
        break;
      }
      const double f0 = bp.value(x, y, mu);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const VectorXd xn = x + alpha * dx;
        const VectorXd yn = y + alpha * dy;
        const double f1 = bp.value(xn, yn, mu);
        if (std::isfinite(f1) && f1 <= f0 - 0.25 * alpha * dec) {
          x = xn;
          y = yn;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // No descent left at double precision: treat as centred.
        centred = true;
        break;
      }
    }
    if (!centred) stalled = true;
    result.path_objective.push_back(bp.objective(x, y));
    result.status.iterations = newton_total;
    result.status.kkt_residual = m * mu / scale;
    if (m * mu <= schedule.tol * scale) {
      result.status.code = stalled ? SolveStatusCode::iteration_limit : SolveStatusCode::optimal;
      break;
    }
    mu *= schedule.shrink;
  }

  result.x = x;
  result.epigraph = y;
  result.scenario_signs = bp.signs(x, y, mu);
  result.objective = problem.abs_weight * (problem.rows * x).cwiseAbs().sum() -
                     problem.log_weight * x.array().log().sum();
  if (result.status.code != SolveStatusCode::optimal) {
    result.status.message = stalled ? "barrier centring hit the Newton iteration limit"
                                    : "barrier path hit the outer iteration limit";
  }
  return result;
}

}  // namespace madrp
