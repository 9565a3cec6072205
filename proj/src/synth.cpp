#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "madrp/error.hpp"
#include "madrp/scenarios.hpp"

namespace madrp {

ScenarioMatrix comonotone_from_factor(const Eigen::VectorXd& factor,
                                      std::span<const double> scales,
                                      std::span<const double> offsets) {
  const auto n = static_cast<Index>(scales.size());
  if (n < 2) throw InputError("comonotone market needs n >= 2 (the condition is pairwise)");
  if (offsets.size() != scales.size()) throw InputError("offsets and scales differ in length");
  for (double s : scales) {
    if (!(s > 0.0)) throw InputError("comonotone scales must be positive");
  }
  Eigen::MatrixXd r(factor.size(), n);
  for (Index i = 0; i < n; ++i) {
    r.col(i) = (scales[static_cast<std::size_t>(i)] * factor).array() +
               offsets[static_cast<std::size_t>(i)];
  }
  return ScenarioMatrix(std::move(r));
}

ScenarioMatrix synth_comonotone(Index n, Index num_scenarios,
                                std::span<const double> scales, std::uint64_t seed) {
  if (n < 2) throw InputError("comonotone market needs n >= 2 (the condition is pairwise)");
  if (static_cast<Index>(scales.size()) != n) throw InputError("need one scale per asset");
  double max_scale = 0.0;
  for (double s : scales) {
    if (!(s > 0.0)) throw InputError("comonotone scales must be positive");
    max_scale = std::max(max_scale, s);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.01);
  Eigen::VectorXd z(num_scenarios);
  // Keep every return above -50%.
  const double bound = 0.5 / max_scale;
  for (Index t = 0; t < num_scenarios; ++t) {
    double v = normal(rng);
    while (std::abs(v) >= bound) v = normal(rng);
    z[t] = v;
  }
  std::vector<double> offsets(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) offsets[static_cast<std::size_t>(i)] = 2e-4 * static_cast<double>(i + 1);
  return comonotone_from_factor(z, scales, offsets);
}

ScenarioMatrix synth_random_market(Index n, Index num_scenarios, std::uint64_t seed) {
  if (n < 1) throw InputError("random market needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd beta(n), idio(n), drift(n);
  for (Index i = 0; i < n; ++i) {
    beta[i] = 0.2 + 1.2 * unif(rng);
    idio[i] = 0.004 + 0.016 * unif(rng);
    drift[i] = 1e-3 * (unif(rng) - 0.3);
  }
  Eigen::MatrixXd r(num_scenarios, n);
  for (Index t = 0; t < num_scenarios; ++t) {
    const double f = 0.01 * normal(rng);
    for (Index i = 0; i < n; ++i) {
      double v = drift[i] + beta[i] * f + idio[i] * normal(rng);
      r(t, i) = std::clamp(v, -0.5, 0.5);
    }
  }
  return ScenarioMatrix(std::move(r));
}

}  // namespace madrp
