#include <algorithm>
#include <cmath>
#include <string>

#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
#include "solver_common.hpp"

namespace madrp {

using Eigen::VectorXd;

namespace {

AbsSumLogProblem mad_problem(const ScenarioMatrix& scn) {
  AbsSumLogProblem p;
  p.rows = scn.deviations();
  p.abs_weight = 1.0 / static_cast<double>(scn.num_scenarios());
  return p;
}

BarrierSchedule schedule_from(const SolverOptions& opts) {
  BarrierSchedule s;
  s.tol = std::min(1e-10, opts.tol);
  s.max_outer = opts.max_iter;
  return s;
}

}  // namespace

SolverReport solve_log_obj(const ScenarioMatrix& scn, const SolverOptions& opts) {
  require_nondegenerate(scn);
  const Index n = scn.num_assets();
  const VectorXd ew = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const double lambda = opts.log_weight.value_or(mad(scn, ew) / static_cast<double>(n));
  if (!(lambda > 0.0)) throw InputError("log_obj weight must be positive");

  AbsSumLogProblem p = mad_problem(scn);
  p.log_weight = lambda;
  // At the optimum MAD(x) = n * lambda, so EW scaled by lambda / lambda_default
  // starts on the right scale.
  const double start_scale = lambda / (mad(scn, ew) / static_cast<double>(n));
  const BarrierResult res = solve_barrier(p, ew * start_scale, schedule_from(opts));
  return detail::finish_rp(scn, Method::log_obj, res.x, res.status, opts.refine,
                           &res.scenario_signs);
}

SolverReport solve_log_constr(const ScenarioMatrix& scn, const SolverOptions& opts) {
  require_nondegenerate(scn);
  const Index n = scn.num_assets();
  const double nd = static_cast<double>(n);
  const double ew_level = -nd * std::log(nd);
  const double floor = opts.log_floor.value_or(ew_level);
  const VectorXd ew = VectorXd::Constant(n, 1.0 / nd);

  AbsSumLogProblem p = mad_problem(scn);
  p.log_floor = floor;
  if (opts.budget_constraint) {
    // On the simplex sum ln x <= -n ln n, with equality only at EW.
    const double slack = floor - ew_level;
    if (slack > 1e-12 * nd) {
      SolveStatus st{SolveStatusCode::infeasible, 0, 0.0,
                     "log floor " + std::to_string(floor) +
                         " exceeds the simplex maximum -n ln n"};
      throw SolveFailure(st);
    }
    if (slack >= -1e-12 * nd) {
      SolveStatus st{SolveStatusCode::optimal, 0, 0.0,
                     "equal weights are the only feasible point"};
      return detail::make_report(scn, Method::log_constr, ew, st);
    }
    p.eq_matrix = Eigen::MatrixXd::Ones(1, n);
    p.eq_rhs = VectorXd::Ones(1);
    const BarrierResult res = solve_barrier(p, ew, schedule_from(opts));
    return detail::make_report(scn, Method::log_constr, res.x / res.x.sum(), res.status);
  }

  // Start n units of log above the floor.
  const VectorXd start = VectorXd::Constant(n, std::exp(floor / nd + 1.0));
  const BarrierResult res = solve_barrier(p, start, schedule_from(opts));
  return detail::finish_rp(scn, Method::log_constr, res.x, res.status, opts.refine,
                           &res.scenario_signs);
}

}  // namespace madrp
