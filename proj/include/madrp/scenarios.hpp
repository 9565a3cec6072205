#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace madrp {

using Index = Eigen::Index;

/// Daily price history, one column per asset. Rows are chronological.
struct PriceSeries {
  std::vector<std::string> asset_ids;
  Eigen::MatrixXd prices;  // (T+1) x n, strictly positive
  std::optional<std::vector<std::string>> dates;

  Index num_assets() const { return prices.cols(); }
  Index num_rows() const { return prices.rows(); }

  /// Throws InputError / CellError when an invariant does not hold.
  void validate() const;
};

/// Discrete equiprobable return model: T scenarios of n linear asset returns.
///
/// Immutable after construction. Deviations from the per-asset means are
/// cached because every risk computation works on them.
class ScenarioMatrix {
 public:
  explicit ScenarioMatrix(Eigen::MatrixXd returns);

  const Eigen::MatrixXd& returns() const { return returns_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::MatrixXd& deviations() const { return deviations_; }

  Index num_assets() const { return returns_.cols(); }
  Index num_scenarios() const { return returns_.rows(); }

  /// Scenarios [begin, begin + count).
  ScenarioMatrix window(Index begin, Index count) const;
  ScenarioMatrix first(Index count) const { return window(0, count); }
  ScenarioMatrix scaled(double factor) const;

  /// Assets whose return never deviates from its mean.
  std::vector<Index> constant_assets() const;

 private:
  Eigen::MatrixXd returns_;
  Eigen::VectorXd means_;
  Eigen::MatrixXd deviations_;
};

struct DatasetDescriptor {
  std::string name;
  Index n_assets = 0;
  Index n_days = 0;
  std::string period;
};

DatasetDescriptor describe_dataset(const std::string& name,
                                   const PriceSeries& prices);

/// r_t = (p_t - p_{t-1}) / p_{t-1}, column by column.
ScenarioMatrix returns_from_prices(const PriceSeries& prices);

/// Inverse of returns_from_prices starting every asset at `initial_price`.
PriceSeries prices_from_returns(const Eigen::MatrixXd& returns,
                                std::vector<std::string> asset_ids,
                                double initial_price = 100.0);

struct CsvLayout {
  bool header = true;
  bool date_column = true;
  char delimiter = ',';
};

PriceSeries parse_csv(std::istream& in, const CsvLayout& layout = {});
PriceSeries load_csv(const std::filesystem::path& path,
                     const CsvLayout& layout = {});
void write_csv(std::ostream& out, const PriceSeries& prices,
               const CsvLayout& layout = {});
void save_csv(const std::filesystem::path& path, const PriceSeries& prices,
              const CsvLayout& layout = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Synthetic instances ------------------------------------------------------

/// r_it = scales[i] * z_t + offsets[i]. Deviations of every pair of assets
/// share the sign of z_t - mean(z), so MAD is additive on the result.
ScenarioMatrix comonotone_from_factor(const Eigen::VectorXd& factor,
                                      std::span<const double> scales,
                                      std::span<const double> offsets);

/// Comonotone market driven by one Gaussian factor (daily scale ~1%).
ScenarioMatrix synth_comonotone(Index n, Index num_scenarios,
                                std::span<const double> scales,
                                std::uint64_t seed);

/// One-factor market with idiosyncratic noise; generically non-additive and
/// free of ties.
ScenarioMatrix synth_random_market(Index n, Index num_scenarios,
                                   std::uint64_t seed);

}  // namespace madrp
