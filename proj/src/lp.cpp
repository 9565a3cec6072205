#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "madrp/error.hpp"
#include "madrp/optim.hpp"

namespace madrp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void LinearProgram::validate() const {
  const Index n = num_variables();
  if (n == 0) throw InputError("linear program has no variables");
  if (eq_matrix.size() > 0 || eq_rhs.size() > 0) {
    if (eq_matrix.cols() != n || eq_matrix.rows() != eq_rhs.size()) {
      throw InputError("equality constraint dimensions are inconsistent");
    }
  }
  if (ineq_matrix.size() > 0 || ineq_rhs.size() > 0) {
    if (ineq_matrix.cols() != n || ineq_matrix.rows() != ineq_rhs.size()) {
      throw InputError("inequality constraint dimensions are inconsistent");
    }
  }
  if (lower.size() != 0 && lower.size() != n) throw InputError("lower bound length mismatch");
  if (upper.size() != 0 && upper.size() != n) throw InputError("upper bound length mismatch");
  if (lower.size() == n && upper.size() == n) {
    for (Index i = 0; i < n; ++i) {
      if (lower[i] > upper[i]) {
        throw InputError("lower bound exceeds upper bound for variable " + std::to_string(i));
      }
    }
  }
  if (!objective.allFinite()) throw InputError("objective must be finite");
}

namespace {

struct Standardized {
  MatrixXd A;
  VectorXd b;
  MatrixXd G;
  VectorXd h;
};

// Folds finite bounds into G x <= h.
Standardized standardize(const LinearProgram& lp) {
  const Index n = lp.num_variables();
  Standardized s;
  s.A = lp.eq_matrix.size() > 0 ? lp.eq_matrix : MatrixXd(0, n);
  s.b = lp.eq_rhs.size() > 0 ? lp.eq_rhs : VectorXd(0);

  std::vector<std::pair<Index, double>> lo;
  std::vector<std::pair<Index, double>> hi;
  for (Index i = 0; i < lp.lower.size(); ++i) {
    if (std::isfinite(lp.lower[i])) lo.emplace_back(i, lp.lower[i]);
  }
  for (Index i = 0; i < lp.upper.size(); ++i) {
    if (std::isfinite(lp.upper[i])) hi.emplace_back(i, lp.upper[i]);
  }
  const Index m0 = lp.ineq_matrix.size() > 0 ? lp.ineq_matrix.rows() : 0;
  const Index m = m0 + static_cast<Index>(lo.size() + hi.size());
  s.G = MatrixXd::Zero(m, n);
  s.h = VectorXd::Zero(m);
  if (m0 > 0) {
    s.G.topRows(m0) = lp.ineq_matrix;
    s.h.head(m0) = lp.ineq_rhs;
  }
  Index row = m0;
  for (const auto& [i, v] : lo) {
    s.G(row, i) = -1.0;
    s.h[row++] = -v;
  }
  for (const auto& [i, v] : hi) {
    s.G(row, i) = 1.0;
    s.h[row++] = v;
  }
  return s;
}

double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

class KktSystem {
 public:
  KktSystem(const MatrixXd& A, const MatrixXd& G) : A_(A), G_(G) {}

  // Factor [G^T D G  A^T; A  0] with a small primal/dual regularisation.
  void factor(const VectorXd& d) {
    const Index n = G_.cols();
    const Index p = A_.rows();
    H_ = G_.transpose() * d.asDiagonal() * G_;
    const double reg = 1e-13 * std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
    K_ = MatrixXd::Zero(n + p, n + p);
    K_.topLeftCorner(n, n) = H_;
    K_.topRightCorner(n, p) = A_.transpose();
    K_.bottomLeftCorner(p, n) = A_;
    MatrixXd Kreg = K_;
    Kreg.topLeftCorner(n, n).diagonal().array() += reg;
    Kreg.bottomRightCorner(p, p).diagonal().array() -= reg;
    lu_.compute(Kreg);
  }

  // Solves the unregularised system with two refinement sweeps.
  VectorXd solve(const VectorXd& rhs) const {
    VectorXd sol = lu_.solve(rhs);
    for (int k = 0; k < 2; ++k) sol += lu_.solve(rhs - K_ * sol);
    return sol;
  }

 private:
  const MatrixXd& A_;
  const MatrixXd& G_;
  MatrixXd H_;
  MatrixXd K_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

LpResult interior_point(const LinearProgram& lp, double tol, int max_iter, bool phase_one);

// min sum|A x - b| + max(G x - h)^+ through elastic variables. Always feasible
// and bounded below by zero; a clearly positive optimum proves infeasibility.
double phase_one_violation(const Standardized& st, double tol, int max_iter) {
  const Index n = st.G.cols();
  const Index p = st.A.rows();
  const Index m = st.G.rows();
  const Index nv = n + 2 * p + 1;
  LinearProgram aux;
  aux.objective = VectorXd::Zero(nv);
  aux.objective.tail(2 * p + 1).setOnes();
  if (p > 0) {
    aux.eq_matrix = MatrixXd::Zero(p, nv);
    aux.eq_matrix.leftCols(n) = st.A;
    aux.eq_matrix.middleCols(n, p) = MatrixXd::Identity(p, p);
    aux.eq_matrix.middleCols(n + p, p) = -MatrixXd::Identity(p, p);
    aux.eq_rhs = st.b;
  }
  if (m > 0) {
    aux.ineq_matrix = MatrixXd::Zero(m, nv);
    aux.ineq_matrix.leftCols(n) = st.G;
    aux.ineq_matrix.col(nv - 1).setConstant(-1.0);
    aux.ineq_rhs = st.h;
  }
  aux.lower = VectorXd::Constant(nv, -std::numeric_limits<double>::infinity());
  aux.lower.tail(2 * p + 1).setZero();
  const LpResult r = interior_point(aux, tol, max_iter, false);
  return r.status.optimal() ? r.objective : 0.0;
}

LpResult interior_point(const LinearProgram& lp, double tol, int max_iter, bool phase_one) {
  const Standardized st = standardize(lp);
  const MatrixXd& A = st.A;
  const MatrixXd& G = st.G;
  const VectorXd& b = st.b;
  const VectorXd& h = st.h;
  const VectorXd& c = lp.objective;
  const Index n = lp.num_variables();
  const Index p = A.rows();
  const Index m = G.rows();

  const double norm_c = std::max(1.0, c.norm());
  const double norm_bh = std::max(1.0, std::sqrt(b.squaredNorm() + h.squaredNorm()));
  const double cert_tol = std::max(tol, 1e-9);
  std::vector<double> pres_history;

  VectorXd x = VectorXd::Zero(n);
  VectorXd y = VectorXd::Zero(p);
  VectorXd s = (h - G * x).cwiseMax(1.0);
  VectorXd z = VectorXd::Ones(m);

  LpResult result;
  KktSystem kkt(A, G);

  auto newton = [&](const VectorXd& rd, const VectorXd& rp, const VectorXd& ri,
                    const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& ds,
                    VectorXd& dz) {
    // z.ds + s.dz = -rc,  G dx + ds = -ri  =>  dz = (z/s)(G dx + ri - rc/z)
    const VectorXd w = ri - rc.cwiseQuotient(z);
    VectorXd rhs(n + p);
    rhs.head(n) = -rd - G.transpose() * (z.cwiseQuotient(s).cwiseProduct(w));
    rhs.tail(p) = -rp;
    const VectorXd sol = kkt.solve(rhs);
    dx = sol.head(n);
    dy = sol.tail(p);
    dz = z.cwiseQuotient(s).cwiseProduct(G * dx + w);
    ds = (-rc - s.cwiseProduct(dz)).cwiseQuotient(z);
  };

  for (int iter = 0; iter <= max_iter; ++iter) {
    const VectorXd rd = c + A.transpose() * y + G.transpose() * z;
    const VectorXd rp = A * x - b;
    const VectorXd ri = G * x + s - h;
    const double gap = m > 0 ? s.dot(z) : 0.0;
    const double pobj = c.dot(x);
    const double dobj = -b.dot(y) - h.dot(z);

    const double pres = std::sqrt(rp.squaredNorm() + ri.squaredNorm()) / norm_bh;
    const double dres = rd.norm() / norm_c;
    const double rgap = gap / std::max(1.0, std::abs(pobj));
    result.status.iterations = iter;
    result.status.kkt_residual = std::max({pres, dres, rgap});
    result.x = x;
    result.objective = pobj;
    if (result.status.kkt_residual <= tol) {
      result.status.code = SolveStatusCode::optimal;
      return result;
    }

    // Farkas certificates: dual ray (primal infeasible), primal ray (unbounded).
    if (dobj > 0.0) {
      const double pinf = (A.transpose() * y + G.transpose() * z).norm() / norm_c / dobj;
      if (pinf <= cert_tol && dobj > 1.0 / cert_tol) {
        result.status.code = SolveStatusCode::infeasible;
        result.status.message = "linear program is infeasible";
        return result;
      }
    }
    if (pobj < 0.0) {
      const double ray = std::sqrt((A * x).squaredNorm() +
                                   (G * x).cwiseMax(0.0).squaredNorm()) /
                         -pobj;
      if (ray <= cert_tol && -pobj > 1.0 / cert_tol) {
        result.status.code = SolveStatusCode::unbounded;
        result.status.message = "linear program is unbounded";
        return result;
      }
    }
    pres_history.push_back(pres);
    if (iter == max_iter) break;
    // A primal residual that stops shrinking signals an empty feasible set.
    if (phase_one && iter >= 20 && pres > tol && pres > 0.9 * pres_history[iter - 10]) break;

    kkt.factor(z.cwiseQuotient(s));
    const double mu = m > 0 ? gap / static_cast<double>(m) : 0.0;

    VectorXd dx, dy, ds, dz;
    newton(rd, rp, ri, s.cwiseProduct(z), dx, dy, ds, dz);
    const double ap_aff = std::min(1.0, max_step(s, ds));
    const double ad_aff = std::min(1.0, max_step(z, dz));
    double sigma = 0.0;
    if (m > 0 && mu > 0.0) {
      const double mu_aff = (s + ap_aff * ds).dot(z + ad_aff * dz) / static_cast<double>(m);
      sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    }
    const VectorXd rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) -
                        VectorXd::Constant(m, sigma * mu);
    newton(rd, rp, ri, rc, dx, dy, ds, dz);

    const double ap = std::min(1.0, 0.99 * max_step(s, ds));
    const double ad = std::min(1.0, 0.99 * max_step(z, dz));
    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    z += ad * dz;
    if (!x.allFinite() || !z.allFinite()) break;
  }
  if (phase_one) {
    const double violation = phase_one_violation(st, std::max(tol, 1e-10), max_iter);
    if (violation > 1e-6 * norm_bh) {
      result.status.code = SolveStatusCode::infeasible;
      result.status.message = "linear program is infeasible";
      return result;
    }
  }
  result.status.code = SolveStatusCode::iteration_limit;
  result.status.message = "interior point method hit the iteration limit";
  return result;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol, int max_iter) {
  lp.validate();
  return interior_point(lp, tol, max_iter, true);
}

}  // namespace madrp
