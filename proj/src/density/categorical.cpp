#include "fnf/density/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::density {

AutoregressiveCategorical::AutoregressiveCategorical(std::vector<int> cardinalities, std::vector<int> order,
                                                     double alpha)
    : cards_(std::move(cardinalities)), order_(std::move(order)), alpha_(alpha) {
  if (cards_.empty()) throw UsageError("categorical model needs at least one column");
  if (!(alpha_ > 0) || !std::isfinite(alpha_)) throw UsageError("smoothing alpha must be positive");
  if (order_.empty()) {
    order_.resize(cards_.size());
    std::iota(order_.begin(), order_.end(), 0);
  }
  if (order_.size() != cards_.size()) throw UsageError("column order has the wrong length");
  std::vector<int> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) throw UsageError("column order must be a permutation");
  }
  long double span = 1;
  for (int c : cards_) {
    if (c < 1) throw UsageError("cardinalities must be positive");
    span *= c;
  }
  if (span > static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
    throw UsageError("categorical domain too large to index");
  }
  counts_.resize(cards_.size());
}

void AutoregressiveCategorical::check_row(std::span<const int> x) const {
  if (x.size() != cards_.size()) throw UsageError("categorical row has the wrong length");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < 0 || x[j] >= cards_[j]) {
      throw UsageError("value " + std::to_string(x[j]) + " out of range for column " + std::to_string(j));
    }
  }
}

std::uint64_t AutoregressiveCategorical::prefix_code(std::size_t position, std::span<const int> x) const {
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < position; ++i) {
    const auto col = static_cast<std::size_t>(order_[i]);
    code = code * static_cast<std::uint64_t>(cards_[col]) + static_cast<std::uint64_t>(x[col]);
  }
  return code;
}

void AutoregressiveCategorical::observe(std::span<const int> x) {
  check_row(x);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto col = static_cast<std::size_t>(order_[i]);
    auto& row = counts_[i][prefix_code(i, x)];
    if (row.empty()) row.assign(static_cast<std::size_t>(cards_[col]), 0.0);
    row[static_cast<std::size_t>(x[col])] += 1.0;
  }
}

void AutoregressiveCategorical::set_counts(std::size_t position, std::uint64_t prefix, std::vector<double> counts) {
  if (position >= order_.size()) throw UsageError("count position out of range");
  if (counts.size() != static_cast<std::size_t>(cards_[static_cast<std::size_t>(order_[position])])) {
    throw UsageError("count vector has the wrong length");
  }
  counts_[position][prefix] = std::move(counts);
}

std::vector<double> AutoregressiveCategorical::conditional(std::size_t position, std::span<const int> x) const {
  const auto col = static_cast<std::size_t>(order_.at(position));
  const auto d = static_cast<std::size_t>(cards_[col]);
  std::vector<double> p(d, 1.0 / static_cast<double>(d));
  const auto it = counts_[position].find(prefix_code(position, x));
  if (it == counts_[position].end()) return p;
  const double total = std::accumulate(it->second.begin(), it->second.end(), 0.0);
  const double denom = total + alpha_ * static_cast<double>(d);
  for (std::size_t v = 0; v < d; ++v) p[v] = (it->second[v] + alpha_) / denom;
  return p;
}

double AutoregressiveCategorical::log_density(std::span<const int> x) const {
  check_row(x);
  double lp = 0;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto col = static_cast<std::size_t>(order_[i]);
    lp += std::log(conditional(i, x)[static_cast<std::size_t>(x[col])]);
  }
  return lp;
}

std::vector<int> AutoregressiveCategorical::sample(numerics::Rng& rng) const {
  std::vector<int> x(cards_.size(), 0);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto col = static_cast<std::size_t>(order_[i]);
    const std::vector<double> p = conditional(i, x);
    double u = rng.uniform();
    int v = 0;
    while (v + 1 < cards_[col] && u >= p[static_cast<std::size_t>(v)]) u -= p[static_cast<std::size_t>(v++)];
    x[col] = v;
  }
  return x;
}

AutoregressiveCategorical fit_categorical(const Eigen::MatrixXi& data, const std::vector<int>& cardinalities,
                                          const std::vector<int>& order, double alpha) {
  if (data.cols() != static_cast<Eigen::Index>(cardinalities.size())) {
    throw UsageError("data width does not match cardinalities");
  }
  AutoregressiveCategorical model(cardinalities, order, alpha);
  std::vector<int> row(cardinalities.size());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) row[static_cast<std::size_t>(j)] = data(i, j);
    model.observe(row);
  }
  return model;
}

}  // namespace fnf::density
