#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
#include "solver_common.hpp"

namespace madrp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest (or smallest) value of d^T x over {lo <= x <= hi, sum x = 1}.
double extreme_on_box(const VectorXd& d, const VectorXd& lo, const VectorXd& hi, bool maximize,
                      std::vector<Index>& scratch) {
  const Index n = d.size();
  scratch.resize(static_cast<std::size_t>(n));
  std::iota(scratch.begin(), scratch.end(), Index{0});
  std::sort(scratch.begin(), scratch.end(), [&](Index a, Index b) {
    return maximize ? d[a] > d[b] : d[a] < d[b];
  });
  double budget = 1.0 - lo.sum();
  double value = d.dot(lo);
  for (Index i : scratch) {
    if (budget <= 0.0) break;
    const double take = std::min(hi[i] - lo[i], budget);
    value += take * d[i];
    budget -= take;
  }
  return value;
}

class SignSearch {
 public:
  SignSearch(const ScenarioMatrix& scn, Method variant, std::int64_t budget)
      : D_(scn.deviations()),
        T_(scn.num_scenarios()),
        n_(scn.num_assets()),
        inv_t_(1.0 / static_cast<double>(T_)),
        variant_(variant),
        budget_(budget),
        signs_(VectorXd::Zero(T_)),
        c_(VectorXd::Zero(n_)) {
    order_.resize(static_cast<std::size_t>(T_));
    std::iota(order_.begin(), order_.end(), Index{0});
    std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) {
      return D_.row(a).lpNorm<1>() > D_.row(b).lpNorm<1>();
    });
    rem_ = MatrixXd::Zero(T_ + 1, n_);
    for (Index k = T_ - 1; k >= 0; --k) {
      rem_.row(k) = rem_.row(k + 1) + D_.row(order_[static_cast<std::size_t>(k)]).cwiseAbs() * inv_t_;
    }
    tol_ = 1e-10 * D_.cwiseAbs().maxCoeff();
    guess_ = initial_guess(scn);
  }

  bool run() { return dfs(0); }
  bool exhausted_budget() const { return nodes_ > budget_; }
  std::int64_t nodes() const { return nodes_; }
  const VectorXd& x() const { return x_; }
  double lambda() const { return lambda_; }

 private:
  VectorXd initial_guess(const ScenarioMatrix& scn) const {
    VectorXd x = asset_mads(scn).cwiseInverse();
    x /= x.sum();
    for (int k = 0; k < 50; ++k) {
      const VectorXd u = D_ * x;
      const VectorXd s = u.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
      const VectorXd g = D_.transpose() * s * inv_t_;
      if (!(g.minCoeff() > 0.0)) break;
      const VectorXd w = g.cwiseInverse();
      x = 0.5 * x + 0.5 * w / w.sum();
    }
    const VectorXd u = D_ * x;
    return u.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  }

  bool box_consistent(Index depth) {
    const VectorXd lo = c_ - rem_.row(depth).transpose();
    const VectorXd hi = c_ + rem_.row(depth).transpose();
    if (hi.minCoeff() <= 0.0) return false;
    const VectorXd wlo = hi.cwiseInverse();
    const VectorXd whi = lo.unaryExpr([](double v) { return v > 0.0 ? 1.0 / v : kInf; });
    const double sum_lo = wlo.sum();
    double finite_hi = 0.0;
    int infinite_hi = 0;
    for (Index i = 0; i < n_; ++i) {
      if (std::isinf(whi[i])) {
        ++infinite_hi;
      } else {
        finite_hi += whi[i];
      }
    }
    VectorXd xlo(n_);
    VectorXd xhi(n_);
    for (Index i = 0; i < n_; ++i) {
      const bool self_inf = std::isinf(whi[i]);
      const bool others_inf = infinite_hi - (self_inf ? 1 : 0) > 0;
      const double others_hi = finite_hi - (self_inf ? 0.0 : whi[i]);
      xlo[i] = others_inf ? 0.0 : wlo[i] / (wlo[i] + others_hi);
      xhi[i] = self_inf ? 1.0 : whi[i] / (whi[i] + (sum_lo - wlo[i]));
    }
    if (xlo.sum() > 1.0 + 1e-12 || xhi.sum() < 1.0 - 1e-12) return false;
    for (Index k = 0; k < depth; ++k) {
      const Index t = order_[static_cast<std::size_t>(k)];
      const VectorXd d = D_.row(t).transpose();
      const double s = signs_[t];
      if (s >= 0.0 && extreme_on_box(d, xlo, xhi, true, scratch_) < -tol_) return false;
      if (s <= 0.0 && extreme_on_box(d, xlo, xhi, false, scratch_) > tol_) return false;
    }
    return true;
  }

  bool leaf() {
    const VectorXd& g = c_;
    if (!(g.minCoeff() > 0.0)) return false;
    VectorXd x;
    double lambda = 0.0;
    if (variant_ == Method::soe_1) {
      // [diag(g) -1; 1^T 0] [x; lambda] = [0; 1]
      MatrixXd K = MatrixXd::Zero(n_ + 1, n_ + 1);
      K.topLeftCorner(n_, n_).diagonal() = g;
      K.topRightCorner(n_, 1).setConstant(-1.0);
      K.bottomLeftCorner(1, n_).setOnes();
      VectorXd rhs = VectorXd::Zero(n_ + 1);
      rhs[n_] = 1.0;
      const VectorXd sol = K.partialPivLu().solve(rhs);
      x = sol.head(n_);
      lambda = sol[n_];
      if (!(x.minCoeff() >= 0.0)) return false;
    } else {
      // x_i = q_i^2 with q_i^2 g_i = lambda
      lambda = 1.0 / g.cwiseInverse().sum();
      const VectorXd q = (lambda * g.cwiseInverse()).cwiseSqrt();
      x = q.cwiseAbs2();
    }
    const VectorXd u = D_ * x;
    const double tol = 1e-10 * (D_.cwiseAbs() * x).maxCoeff();
    for (Index t = 0; t < T_; ++t) {
      const double s = signs_[t];
      if (s > 0.0 && u[t] < -tol) return false;
      if (s < 0.0 && u[t] > tol) return false;
      if (s == 0.0 && std::abs(u[t]) > tol) return false;
    }
    x_ = x;
    lambda_ = lambda;
    return true;
  }

  bool dfs(Index depth) {
    if (++nodes_ > budget_) return false;
    if (!box_consistent(depth)) return false;
    if (depth == T_) return leaf();
    const Index t = order_[static_cast<std::size_t>(depth)];
    const double first = guess_[t];
    for (double s : {first, -first, 0.0}) {
      signs_[t] = s;
      c_ += s * inv_t_ * D_.row(t).transpose();
      const bool found = dfs(depth + 1);
      c_ -= s * inv_t_ * D_.row(t).transpose();
      if (found) return true;
      if (nodes_ > budget_) break;
    }
    signs_[t] = 0.0;
    return false;
  }

  const MatrixXd& D_;
  Index T_;
  Index n_;
  double inv_t_;
  Method variant_;
  std::int64_t budget_;
  std::int64_t nodes_ = 0;
  std::vector<Index> order_;
  MatrixXd rem_;
  VectorXd signs_;
  VectorXd c_;
  VectorXd guess_;
  double tol_ = 0.0;
  VectorXd x_;
  double lambda_ = 0.0;
  std::vector<Index> scratch_;
};

}  // namespace

SolverReport solve_soe(const ScenarioMatrix& scn, Method variant, const SolverOptions& opts) {
  if (variant != Method::soe_1 && variant != Method::soe_2) {
    throw InputError("solve_soe variant must be soe_1 or soe_2");
  }
  const Index T = scn.num_scenarios();
  if (T > opts.soe_max_scenarios) {
    throw SolveFailure({SolveStatusCode::iteration_limit, 0, 0.0,
                        "sign-pattern search is limited to " +
                            std::to_string(opts.soe_max_scenarios) + " scenarios, got " +
                            std::to_string(T)});
  }
  require_nondegenerate(scn);

  SignSearch search(scn, variant, opts.soe_node_budget);
  const bool found = search.run();
  SolveStatus st;
  st.iterations = static_cast<int>(std::min<std::int64_t>(search.nodes(), 1'000'000'000));
  if (!found) {
    if (search.exhausted_budget()) {
      st.code = SolveStatusCode::iteration_limit;
      st.message = "sign-pattern search exceeded its node budget of " +
                   std::to_string(opts.soe_node_budget) + "; fall back to log_constr";
    } else {
      st.code = SolveStatusCode::infeasible;
      st.message =
          "no sign pattern with subgradient entries in {-1, 0, +1} is consistent; the "
          "simplified sign system can be infeasible at corner cases even though the MAD "
          "risk parity portfolio exists; fall back to log_constr";
    }
    throw SolveFailure(st);
  }
  const VectorXd x = search.x() / search.x().sum();
  const VectorXd g = mad_subgradient(scn, x, TieRule::balanced).g;
  st.code = SolveStatusCode::optimal;
  st.kkt_residual = (x.cwiseProduct(g).array() - x.dot(g) / static_cast<double>(x.size()))
                        .abs()
                        .maxCoeff() /
                    std::max(x.dot(g), std::numeric_limits<double>::min());
  SolverReport report = detail::make_report(scn, variant, x, st);
  report.risk_level = search.lambda() / search.x().sum();
  return report;
}

}  // namespace madrp
