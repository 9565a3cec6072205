#pragma once

#include <Eigen/Core>

#include "madrp/solvers.hpp"

namespace madrp::detail {

/// Normalizes `x`, optionally polishes it with refine_rp and fills the
/// accuracy diagnostics.
SolverReport finish_rp(const ScenarioMatrix& scn, Method method, const Eigen::VectorXd& x,
                       SolveStatus status, bool refine,
                       const Eigen::VectorXd* sign_hint = nullptr);

/// Report for a fixed simplex point (no polishing).
SolverReport make_report(const ScenarioMatrix& scn, Method method, const Eigen::VectorXd& x,
                         SolveStatus status);

}  // namespace madrp::detail
