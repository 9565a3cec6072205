#include <algorithm>
#include <functional>
#include <vector>

#include "madrp/error.hpp"
#include "madrp/optim.hpp"

namespace madrp {

std::string_view to_string(SolveStatusCode code) {
  switch (code) {
    case SolveStatusCode::optimal: return "optimal";
    case SolveStatusCode::infeasible: return "infeasible";
    case SolveStatusCode::unbounded: return "unbounded";
    case SolveStatusCode::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

// Sort-based projection (Held, Wolfe and Crowder).
Eigen::VectorXd project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  if (n < 1) throw InputError("project_simplex needs a nonempty vector");
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  Eigen::VectorXd x = (v.array() - theta).cwiseMax(0.0).matrix();
  const double total = x.sum();
  if (total > 0.0 && total != 1.0) x /= total;
  return x;
}

}  // namespace madrp
