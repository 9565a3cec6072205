#include "madrp/risk.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "madrp/error.hpp"

namespace madrp {
namespace {

void check_dims(const ScenarioMatrix& scn, Index n) {
  if (n != scn.num_assets()) {
    throw InputError("weight vector has " + std::to_string(n) + " entries, market has " +
                     std::to_string(scn.num_assets()) + " assets");
  }
}

struct CentredSums {
  double positive = 0.0;  // (1/T) sum_t max(v_t, 0)
  double absolute = 0.0;  // (1/T) sum_t |v_t|
};

// Deviations are quantised to 53-bit integers on a common power-of-two grid,
// centred exactly (T * U_t - sum U) and summed in 128-bit integers. The
// quantisation error is below one ulp of the largest deviation.
CentredSums centred_sums(const Eigen::VectorXd& u) {
  const Index T = u.size();
  const double peak = u.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return {};
  int exponent = 0;
  std::frexp(peak, &exponent);
  const int shift = 53 - exponent;

  std::vector<std::int64_t> q(static_cast<std::size_t>(T));
  __int128 total = 0;
  for (Index t = 0; t < T; ++t) {
    q[static_cast<std::size_t>(t)] = std::llround(std::ldexp(u[t], shift));
    total += q[static_cast<std::size_t>(t)];
  }
  __int128 pos = 0;
  __int128 abs = 0;
  for (Index t = 0; t < T; ++t) {
    const __int128 v = static_cast<__int128>(T) * q[static_cast<std::size_t>(t)] - total;
    if (v > 0) pos += v;
    abs += v < 0 ? -v : v;
  }
  const double tt = static_cast<double>(T) * static_cast<double>(T);
  CentredSums out;
  out.positive = std::ldexp(static_cast<double>(pos), -shift) / tt;
  out.absolute = std::ldexp(static_cast<double>(abs), -shift) / tt;
  return out;
}

// Primal active-set method for min ||M s - b||^2 with -1 <= s <= 1.
Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const Index k = M.cols();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
  if (k == 0) return s;
  const Eigen::MatrixXd H = M.transpose() * M;
  const Eigen::VectorXd f = M.transpose() * b;
  std::vector<int> bound(static_cast<std::size_t>(k), 0);  // -1 lower, +1 upper, 0 free

  for (int iter = 0; iter < 8 * static_cast<int>(k) + 20; ++iter) {
    std::vector<Index> free_idx;
    for (Index j = 0; j < k; ++j) {
      if (bound[static_cast<std::size_t>(j)] == 0) free_idx.push_back(j);
    }
    Eigen::VectorXd target = s;
    if (!free_idx.empty()) {
      const auto nf = static_cast<Index>(free_idx.size());
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Index a = 0; a < nf; ++a) {
        rhs[a] = f[free_idx[a]];
        for (Index j = 0; j < k; ++j) {
          if (bound[static_cast<std::size_t>(j)] != 0) rhs[a] -= H(free_idx[a], j) * s[j];
        }
        for (Index c = 0; c < nf; ++c) Hff(a, c) = H(free_idx[a], free_idx[c]);
      }
      const Eigen::VectorXd sol = Hff.completeOrthogonalDecomposition().solve(rhs);
      for (Index a = 0; a < nf; ++a) target[free_idx[a]] = sol[a];
    }

    // Walk towards the free minimiser until a bound blocks.
    double step = 1.0;
    Index blocking = -1;
    for (Index j : free_idx) {
      const double d = target[j] - s[j];
      if (d > 0 && target[j] > 1.0) {
        const double a = (1.0 - s[j]) / d;
        if (a < step) { step = a; blocking = j; }
      } else if (d < 0 && target[j] < -1.0) {
        const double a = (-1.0 - s[j]) / d;
        if (a < step) { step = a; blocking = j; }
      }
    }
    for (Index j : free_idx) s[j] += step * (target[j] - s[j]);
    if (blocking >= 0) {
      const bool upper = target[blocking] > 1.0;
      s[blocking] = upper ? 1.0 : -1.0;
      bound[static_cast<std::size_t>(blocking)] = upper ? 1 : -1;
      continue;
    }

    // Free minimiser reached; release the bound with the worst multiplier.
    const Eigen::VectorXd grad = H * s - f;
    Index release = -1;
    double worst = 0.0;
    for (Index j = 0; j < k; ++j) {
      const int b_j = bound[static_cast<std::size_t>(j)];
      const double v = b_j == -1 ? -grad[j] : (b_j == 1 ? grad[j] : 0.0);
      if (v > worst) { worst = v; release = j; }
    }
    if (release < 0) break;
    bound[static_cast<std::size_t>(release)] = 0;
  }
  return s.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace

PortfolioWeights PortfolioWeights::on_simplex(Eigen::VectorXd x, double tol) {
  if (x.size() == 0) throw InputError("empty weight vector");
  if (!x.allFinite()) throw InputError("weights must be finite");
  if (x.minCoeff() < 0.0) throw InputError("simplex weights must be nonnegative");
  if (std::abs(x.sum() - 1.0) > tol) {
    throw InputError("simplex weights sum to " + std::to_string(x.sum()) + ", not 1");
  }
  return PortfolioWeights(std::move(x), true);
}

PortfolioWeights PortfolioWeights::interior(Eigen::VectorXd x) {
  if (x.size() == 0) throw InputError("empty weight vector");
  if (!x.allFinite() || x.minCoeff() <= 0.0) {
    throw InputError("interior weights must be strictly positive");
  }
  return PortfolioWeights(std::move(x), false);
}

PortfolioWeights PortfolioWeights::equal(Index n) {
  if (n < 1) throw InputError("equal weights need n >= 1");
  return PortfolioWeights(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), true);
}

PortfolioWeights PortfolioWeights::normalize() const {
  const double total = x_.sum();
  if (!(total > 0.0)) throw InputError("cannot normalize weights with non-positive sum");
  Eigen::VectorXd y = x_ / total;
  return PortfolioWeights(std::move(y), true);
}

Eigen::VectorXd portfolio_deviations(const ScenarioMatrix& scn,
                                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dims(scn, x.size());
  return scn.deviations() * x;
}

double mad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return centred_sums(portfolio_deviations(scn, x)).absolute;
}

double msad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return centred_sums(portfolio_deviations(scn, x)).positive;
}

double volatility(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dims(scn, x.size());
  const Eigen::VectorXd r = scn.returns() * x;
  const double mean = r.mean();
  return std::sqrt((r.array() - mean).square().mean());
}

Eigen::VectorXd asset_mads(const ScenarioMatrix& scn) {
  Eigen::VectorXd out(scn.num_assets());
  for (Index i = 0; i < scn.num_assets(); ++i) {
    out[i] = mad(scn, Eigen::VectorXd::Unit(scn.num_assets(), i));
  }
  return out;
}

Eigen::VectorXd subgradient_from_selection(const ScenarioMatrix& scn,
                                           const Eigen::VectorXd& s) {
  if (s.size() != scn.num_scenarios()) throw InputError("selection length must equal T");
  return scn.deviations().transpose() * s / static_cast<double>(scn.num_scenarios());
}

SubgradientSelection select_subgradient(const ScenarioMatrix& scn,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        TieRule rule) {
  const Eigen::VectorXd u = portfolio_deviations(scn, x);
  const Index T = u.size();
  const double limit = kTieRelTol * u.cwiseAbs().maxCoeff();
  SubgradientSelection sel;
  sel.s.resize(T);
  for (Index t = 0; t < T; ++t) {
    if (std::abs(u[t]) <= limit) {
      sel.tie_scenarios.push_back(t);
      sel.s[t] = rule == TieRule::plus ? 1.0 : (rule == TieRule::minus ? -1.0 : 0.0);
    } else {
      sel.s[t] = u[t] > 0 ? 1.0 : -1.0;
    }
  }
  if (rule != TieRule::balanced || sel.tie_scenarios.empty()) return sel;

  const double total = mad(scn, x);
  if (!(total > 0.0)) return sel;
  const Index n = scn.num_assets();
  const auto k = static_cast<Index>(sel.tie_scenarios.size());
  const double inv_t = 1.0 / static_cast<double>(T);
  const Eigen::VectorXd fixed = subgradient_from_selection(scn, sel.s);
  Eigen::MatrixXd M(n, k);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    b[i] = 1.0 / static_cast<double>(n) - x[i] * fixed[i] / total;
    for (Index j = 0; j < k; ++j) {
      M(i, j) = x[i] * scn.deviations()(sel.tie_scenarios[j], i) * inv_t / total;
    }
  }
  const Eigen::VectorXd s_k = box_least_squares(M, b);
  for (Index j = 0; j < k; ++j) sel.s[sel.tie_scenarios[j]] = s_k[j];
  return sel;
}

MadSubgradient mad_subgradient(const ScenarioMatrix& scn,
                               const Eigen::Ref<const Eigen::VectorXd>& x, TieRule rule) {
  MadSubgradient out;
  out.selection = select_subgradient(scn, x, rule);
  out.g = subgradient_from_selection(scn, out.selection.s);
  return out;
}

RiskContributionVector risk_contributions(const ScenarioMatrix& scn,
                                          const Eigen::Ref<const Eigen::VectorXd>& x,
                                          TieRule rule) {
  const MadSubgradient sub = mad_subgradient(scn, x, rule);
  RiskContributionVector out;
  out.rc = x.cwiseProduct(sub.g);
  out.total = out.rc.sum();
  return out;
}

AdditivityReport is_additive(const ScenarioMatrix& scn, double tol) {
  const auto& d = scn.deviations();
  AdditivityReport out;
  for (Index t = 0; t < scn.num_scenarios(); ++t) {
    for (Index i = 0; i < scn.num_assets(); ++i) {
      for (Index j = i + 1; j < scn.num_assets(); ++j) {
        const double p = d(t, i) * d(t, j);
        if (p < -tol) {
          out.additive = false;
          out.witness = AdditivityViolation{t, i, j, p};
          return out;
        }
      }
    }
  }
  return out;
}

PortfolioWeights closed_form_rp(const ScenarioMatrix& scn) {
  const AdditivityReport add = is_additive(scn, 1e-12);
  if (!add.additive) {
    const auto& w = *add.witness;
    throw InputError("market is not MAD-additive: deviations of assets " +
                     std::to_string(w.asset_i) + " and " + std::to_string(w.asset_j) +
                     " have opposite signs in scenario " + std::to_string(w.scenario) +
                     " (pairwise sign-agreement condition fails)");
  }
  const Eigen::VectorXd m = asset_mads(scn);
  for (Index i = 0; i < m.size(); ++i) {
    if (!(m[i] > 0.0)) {
      throw InputError("asset " + std::to_string(i) +
                       " has zero MAD; the closed form needs every asset to be risky");
    }
  }
  const Eigen::VectorXd inv = m.cwiseInverse();
  return PortfolioWeights::on_simplex(inv / inv.sum());
}

double rho_mad(const ScenarioMatrix& scn, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dims(scn, x.size());
  return -scn.means().dot(x) + mad(scn, x);
}

}  // namespace madrp
