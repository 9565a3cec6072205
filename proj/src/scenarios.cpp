#include "madrp/scenarios.hpp"

#include <cmath>
#include <string>

#include "madrp/error.hpp"

namespace madrp {

void PriceSeries::validate() const {
  if (prices.rows() < 2) {
    throw InputError("price series needs at least 2 rows, got " +
                     std::to_string(prices.rows()));
  }
  if (prices.cols() < 1) throw InputError("price series has no assets");
  if (static_cast<Index>(asset_ids.size()) != prices.cols()) {
    throw InputError("asset id count (" + std::to_string(asset_ids.size()) +
                     ") does not match price columns (" +
                     std::to_string(prices.cols()) + ")");
  }
  if (dates && static_cast<Index>(dates->size()) != prices.rows()) {
    throw InputError("date count does not match price rows");
  }
  for (Index t = 0; t < prices.rows(); ++t) {
    for (Index i = 0; i < prices.cols(); ++i) {
      const double p = prices(t, i);
      if (!std::isfinite(p) || p <= 0.0) {
        throw CellError("non-positive price " + format_double(p) + " at row " +
                            std::to_string(t) + ", asset " + asset_ids[i],
                        static_cast<std::size_t>(t), static_cast<std::size_t>(i));
      }
    }
  }
}

ScenarioMatrix::ScenarioMatrix(Eigen::MatrixXd returns) : returns_(std::move(returns)) {
  if (returns_.rows() < 2) {
    throw InputError("scenario matrix needs T >= 2, got " +
                     std::to_string(returns_.rows()));
  }
  if (returns_.cols() < 1) throw InputError("scenario matrix needs n >= 1");
  if (!returns_.allFinite()) throw InputError("scenario matrix has non-finite returns");
  means_ = returns_.colwise().mean().transpose();
  deviations_ = returns_.rowwise() - means_.transpose();
}

ScenarioMatrix ScenarioMatrix::window(Index begin, Index count) const {
  if (begin < 0 || count < 2 || begin + count > num_scenarios()) {
    throw InputError("scenario window [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside 0.." +
                     std::to_string(num_scenarios()));
  }
  return ScenarioMatrix(returns_.middleRows(begin, count));
}

ScenarioMatrix ScenarioMatrix::scaled(double factor) const {
  return ScenarioMatrix(returns_ * factor);
}

std::vector<Index> ScenarioMatrix::constant_assets() const {
  std::vector<Index> out;
  for (Index i = 0; i < num_assets(); ++i) {
    if (deviations_.col(i).cwiseAbs().maxCoeff() == 0.0) out.push_back(i);
  }
  return out;
}

DatasetDescriptor describe_dataset(const std::string& name, const PriceSeries& prices) {
  DatasetDescriptor d;
  d.name = name;
  d.n_assets = prices.num_assets();
  d.n_days = prices.num_rows() - 1;
  if (prices.dates && !prices.dates->empty()) {
    d.period = prices.dates->front() + "/" + prices.dates->back();
  }
  return d;
}

ScenarioMatrix returns_from_prices(const PriceSeries& prices) {
  prices.validate();
  const Index rows = prices.num_rows() - 1;
  Eigen::MatrixXd r(rows, prices.num_assets());
  for (Index t = 0; t < rows; ++t) {
    for (Index i = 0; i < prices.num_assets(); ++i) {
      const double prev = prices.prices(t, i);
      r(t, i) = (prices.prices(t + 1, i) - prev) / prev;
    }
  }
  return ScenarioMatrix(std::move(r));
}

PriceSeries prices_from_returns(const Eigen::MatrixXd& returns,
                                std::vector<std::string> asset_ids,
                                double initial_price) {
  if (static_cast<Index>(asset_ids.size()) != returns.cols()) {
    throw InputError("asset id count does not match return columns");
  }
  PriceSeries out;
  out.asset_ids = std::move(asset_ids);
  out.prices.resize(returns.rows() + 1, returns.cols());
  out.prices.row(0).setConstant(initial_price);
  for (Index t = 0; t < returns.rows(); ++t) {
    out.prices.row(t + 1) =
        out.prices.row(t).array() * (1.0 + returns.row(t).array());
  }
  out.validate();
  return out;
}

}  // namespace madrp
