#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace madrp {

enum class SolveStatusCode { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(SolveStatusCode code);

struct SolveStatus {
  SolveStatusCode code = SolveStatusCode::optimal;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::string message;

  bool optimal() const { return code == SolveStatusCode::optimal; }
};

/// Euclidean projection onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v);

/// min c^T x  s.t.  A x = b,  G x <= h,  lower <= x <= upper.
///
/// Empty matrices mean "no such constraints"; empty bound vectors mean
/// unbounded. Infinite bound entries are ignored.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return objective.size(); }
  void validate() const;
};

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  SolveStatus status;
};

/// Dense Mehrotra predictor-corrector interior point method.
///
/// Infeasible or unbounded problems are reported through `status`, detected
/// from Farkas-type certificates along the iterates.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-8, int max_iter = 200);

/// min  w * sum_t |a_t^T x|  -  log_weight * sum_i ln x_i
/// s.t. sum_i ln x_i >= log_floor   (when set)
///      E x = e                     (when E has rows)
///
/// The absolute values are handled through epigraph variables
/// y_t >= +-a_t^T x, so the only nonlinearity left is logarithmic.
struct AbsSumLogProblem {
  Eigen::MatrixXd rows;   // a_t as rows, T x n
  double abs_weight = 1.0;
  double log_weight = 0.0;
  std::optional<double> log_floor;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
};

/// Path-following parameters: the barrier weight starts at `initial`
/// (0 = derived from the starting point) and is multiplied by `shrink` after
/// each centring until the duality-gap bound falls below `tol` relative to the
/// starting objective scale.
struct BarrierSchedule {
  double initial = 0.0;
  double shrink = 0.2;
  double tol = 1e-10;
  int max_outer = 200;
  int max_newton = 50;
};

struct BarrierResult {
  Eigen::VectorXd x;
  Eigen::VectorXd epigraph;        // y_t
  Eigen::VectorXd scenario_signs;  // dual estimate of the |.| subgradient, in [-1, 1]
  double objective = 0.0;          // w * sum |a_t^T x| - log_weight * sum ln x
  std::vector<double> path_objective;  // epigraph objective after each centring
  SolveStatus status;
};

/// `start` must be strictly feasible: positive, above the log floor and on
/// the equality constraints.
BarrierResult solve_barrier(const AbsSumLogProblem& problem,
                            const Eigen::VectorXd& start,
                            const BarrierSchedule& schedule = {});

}  // namespace madrp
