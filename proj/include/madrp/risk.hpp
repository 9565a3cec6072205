#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "madrp/scenarios.hpp"

namespace madrp {

/// Scenario t is a tie when |(r_t - mu)^T x| <= kTieRelTol * max_s |(r_s - mu)^T x|.
inline constexpr double kTieRelTol = 1e-12;

/// Long-only capital allocation.
///
/// Either a point of the unit simplex (`normalized()`) or a strictly positive
/// vector before normalization, as produced by the logarithmic formulations.
class PortfolioWeights {
 public:
  static PortfolioWeights on_simplex(Eigen::VectorXd x, double tol = 1e-10);
  static PortfolioWeights interior(Eigen::VectorXd x);
  static PortfolioWeights equal(Index n);

  const Eigen::VectorXd& values() const { return x_; }
  double operator[](Index i) const { return x_[i]; }
  Index size() const { return x_.size(); }
  bool normalized() const { return normalized_; }

  /// x / sum(x) as a simplex point.
  PortfolioWeights normalize() const;

 private:
  PortfolioWeights(Eigen::VectorXd x, bool normalized)
      : x_(std::move(x)), normalized_(normalized) {}

  Eigen::VectorXd x_;
  bool normalized_;
};

/// How the subgradient of |.| is chosen on tie scenarios.
///
/// `balanced` picks the point of [-1, 1]^ties that makes the risk
/// contributions as equal as possible (least squares in RC_i / MAD - 1/n);
/// it coincides with the other rules when there are no ties.
enum class TieRule { zero, plus, minus, balanced };

struct SubgradientSelection {
  Eigen::VectorXd s;  // one entry per scenario, in [-1, 1]
  std::vector<Index> tie_scenarios;
};

struct MadSubgradient {
  Eigen::VectorXd g;  // (1/T) sum_t s_t (r_t - mu)
  SubgradientSelection selection;
};

struct RiskContributionVector {
  Eigen::VectorXd rc;
  double total = 0.0;
};

/// Portfolio deviations (r_t - mu)^T x, one per scenario.
Eigen::VectorXd portfolio_deviations(const ScenarioMatrix& scn,
                                     const Eigen::Ref<const Eigen::VectorXd>& x);

/// Mean absolute deviation of the portfolio return.
///
/// The portfolio deviations are re-centred and reduced in exact fixed-point
/// arithmetic, so the result does not depend on summation order and
/// mad == 2 * msad holds bit for bit.
double mad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Mean semi-absolute (upside) deviation; half of `mad`.
double msad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Population standard deviation of the scenario portfolio returns.
double volatility(const ScenarioMatrix& scn,
                  const Eigen::Ref<const Eigen::VectorXd>& x);

/// MAD of each asset on its own.
Eigen::VectorXd asset_mads(const ScenarioMatrix& scn);

SubgradientSelection select_subgradient(const ScenarioMatrix& scn,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        TieRule rule = TieRule::zero);

MadSubgradient mad_subgradient(const ScenarioMatrix& scn,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               TieRule rule = TieRule::zero);

/// g = (1/T) sum_t s_t (r_t - mu) for an explicit selection.
Eigen::VectorXd subgradient_from_selection(const ScenarioMatrix& scn,
                                           const Eigen::VectorXd& s);

/// RC_i = x_i * g_i for the subgradient picked by `rule`.
RiskContributionVector risk_contributions(const ScenarioMatrix& scn,
                                          const Eigen::Ref<const Eigen::VectorXd>& x,
                                          TieRule rule = TieRule::zero);

struct AdditivityViolation {
  Index scenario = 0;
  Index asset_i = 0;
  Index asset_j = 0;
  double product = 0.0;
};

struct AdditivityReport {
  bool additive = true;
  std::optional<AdditivityViolation> witness;  // first violation found
};

/// Checks (r_it - mu_i)(r_jt - mu_j) >= -tol for every scenario and pair.
AdditivityReport is_additive(const ScenarioMatrix& scn, double tol = 0.0);

/// x_i proportional to 1 / MAD(r_i). Requires an additive market with no
/// constant asset; throws InputError otherwise.
PortfolioWeights closed_form_rp(const ScenarioMatrix& scn);

/// Coherent companion of MAD: -E[R(x)] + MAD(x).
double rho_mad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace madrp
