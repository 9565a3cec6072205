#include <algorithm>
#include <array>
#include <chrono>
#include <string>

#include "madrp/error.hpp"
#include "madrp/solvers.hpp"
#include "solver_common.hpp"

namespace madrp {

namespace {

constexpr std::array<Method, 11> kAllMethods = {
    Method::log_obj, Method::log_constr,  Method::ls_rel,  Method::ls_abs,
    Method::soe_1,   Method::soe_2,       Method::closed_form, Method::vol_rp,
    Method::min_mad, Method::min_var,     Method::ew};

constexpr std::array<Method, 7> kRpMethods = {Method::log_obj, Method::log_constr,
                                              Method::ls_rel,  Method::ls_abs,
                                              Method::soe_1,   Method::soe_2,
                                              Method::closed_form};

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::log_obj: return "log_obj";
    case Method::log_constr: return "log_constr";
    case Method::ls_rel: return "ls_rel";
    case Method::ls_abs: return "ls_abs";
    case Method::soe_1: return "soe_1";
    case Method::soe_2: return "soe_2";
    case Method::closed_form: return "closed_form";
    case Method::vol_rp: return "vol_rp";
    case Method::min_mad: return "min_mad";
    case Method::min_var: return "min_var";
    case Method::ew: return "ew";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  // Short strategy names used in backtest tables.
  if (name == "minv" || name == "minvar") return Method::min_var;
  if (name == "minmad") return Method::min_mad;
  if (name == "volrp") return Method::vol_rp;
  if (name == "madrp") return Method::log_constr;
  return std::nullopt;
}

std::span<const Method> mad_rp_methods() { return kRpMethods; }

bool is_mad_rp(Method method) {
  return std::find(kRpMethods.begin(), kRpMethods.end(), method) != kRpMethods.end();
}

SolverReport solve(const ScenarioMatrix& scn, Method method, const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  SolverReport report;
  switch (method) {
    case Method::log_obj: report = solve_log_obj(scn, opts); break;
    case Method::log_constr: report = solve_log_constr(scn, opts); break;
    case Method::ls_rel: report = solve_ls_rel(scn, opts); break;
    case Method::ls_abs: report = solve_ls_abs(scn, opts); break;
    case Method::soe_1:
    case Method::soe_2: report = solve_soe(scn, method, opts); break;
    case Method::closed_form: report = solve_closed_form(scn); break;
    case Method::vol_rp: report = solve_vol_rp(scn, opts); break;
    case Method::min_mad: report = solve_min_mad(scn, opts); break;
    case Method::min_var: report = solve_min_var(scn, opts); break;
    case Method::ew: report = solve_ew(scn); break;
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace detail {

SolverReport make_report(const ScenarioMatrix& scn, Method method, const Eigen::VectorXd& x,
                         SolveStatus status) {
  if (x.size() != scn.num_assets() || !x.allFinite()) {
    SolveStatus st = status;
    st.code = SolveStatusCode::iteration_limit;
    if (st.message.empty()) st.message = "solver produced no finite portfolio";
    throw SolveFailure(st);
  }
  const Eigen::VectorXd clamped = x.cwiseMax(0.0);
  SolverReport report;
  report.method = method;
  report.weights = PortfolioWeights::on_simplex(clamped / clamped.sum());
  report.status = std::move(status);
  fill_diagnostics(scn, report);
  return report;
}

SolverReport finish_rp(const ScenarioMatrix& scn, Method method, const Eigen::VectorXd& x,
                       SolveStatus status, bool refine, const Eigen::VectorXd* sign_hint) {
  Eigen::VectorXd xn = x / x.sum();
  if (refine) {
    const RefineResult r = refine_rp(scn, xn, sign_hint);
    if (r.improved) xn = r.x;
  }
  return make_report(scn, method, xn, std::move(status));
}

}  // namespace detail

}  // namespace madrp
