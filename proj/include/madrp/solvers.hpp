#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "madrp/optim.hpp"
#include "madrp/risk.hpp"
#include "madrp/scenarios.hpp"

namespace madrp {

enum class Method {
  log_obj,
  log_constr,
  ls_rel,
  ls_abs,
  soe_1,
  soe_2,
  closed_form,
  vol_rp,
  min_mad,
  min_var,
  ew,
};

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// The formulations that target the MAD risk parity portfolio.
std::span<const Method> mad_rp_methods();
bool is_mad_rp(Method method);

struct SolverReport {
  Method method = Method::ew;
  PortfolioWeights weights = PortfolioWeights::equal(1);
  double f_value = 0.0;
  double mad_value = 0.0;
  double mean_abs_dev = 0.0;
  double max_abs_dev = 0.0;
  double wall_time = 0.0;
  SolveStatus status;
  /// Common risk contribution lambda, when the method solves for it (soe).
  std::optional<double> risk_level;
  /// False when the optimum is known not to be unique (min_var).
  bool unique_optimum = true;
};

/// A solve that could not produce a portfolio: infeasible sign system,
/// degenerate market, failed inner LP.
class SolveFailure : public std::runtime_error {
 public:
  explicit SolveFailure(SolveStatus status)
      : std::runtime_error(status.message), status_(std::move(status)) {}
  const SolveStatus& status() const noexcept { return status_; }

 private:
  SolveStatus status_;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;

  /// log_obj weight on -sum ln x; default mad(EW) / n.
  std::optional<double> log_weight;
  /// log_constr floor c; default -n ln n.
  std::optional<double> log_floor;
  /// log_constr with sum x = 1 added.
  bool budget_constraint = false;

  int restarts = 5;
  std::uint64_t seed = 20240901;

  /// Sign-pattern search limits.
  Index soe_max_scenarios = 32;
  std::int64_t soe_node_budget = 2'000'000;

  /// Snap the result onto the exact equal-contribution point of the cell
  /// (and kink hyperplanes) the solver converged to.
  bool refine = true;
};

SolverReport solve_log_obj(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_log_constr(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_ls_rel(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_ls_abs(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_soe(const ScenarioMatrix& scn, Method variant,
                       const SolverOptions& opts = {});
SolverReport solve_closed_form(const ScenarioMatrix& scn);
SolverReport solve_min_mad(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_min_var(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_vol_rp(const ScenarioMatrix& scn, const SolverOptions& opts = {});
SolverReport solve_ew(Index n);
/// EW with diagnostics evaluated on `scn`.
SolverReport solve_ew(const ScenarioMatrix& scn);

/// Dispatch by method; fills `wall_time` around the call.
SolverReport solve(const ScenarioMatrix& scn, Method method,
                   const SolverOptions& opts = {});

/// Population covariance of the scenario returns.
Eigen::MatrixXd covariance(const ScenarioMatrix& scn);

/// Throws SolveFailure unless every nonzero long-only portfolio has positive
/// MAD, the hypothesis under which the risk parity portfolio is unique.
void require_nondegenerate(const ScenarioMatrix& scn);

namespace detail {

struct RefineResult {
  Eigen::VectorXd x;
  bool improved = false;
};

/// Active-set Newton polish of an approximate MAD risk parity point.
///
/// Scenarios whose portfolio deviation is (numerically) zero are kept on
/// their kink hyperplane and their subgradient entries become unknowns in
/// [-1, 1]; the remaining signs are frozen. The system
///   x_i g_i(s) = lambda,  sum x = 1,  a_k^T x = 0 (k tie)
/// is solved by Newton's method and the active set adjusted on sign
/// violations. `sign_hint` (dual estimates, optional) seeds tie entries.
RefineResult refine_rp(const ScenarioMatrix& scn, const Eigen::VectorXd& x,
                       const Eigen::VectorXd* sign_hint = nullptr);

/// Fills f/mad/mean/max diagnostics of `report` from its weights.
void fill_diagnostics(const ScenarioMatrix& scn, SolverReport& report);

}  // namespace detail

}  // namespace madrp
