#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fnf/numerics/rng.hpp"

namespace fnf::density {

// p(x) = prod_i p(x_{o_i} | x_{o_1}, ..., x_{o_{i-1}}) over a fixed column
// order o, with conditionals from smoothed full-prefix counts:
// (count + alpha) / (prefix total + alpha * d_i). Prefixes never seen fall
// back to uniform.
class AutoregressiveCategorical {
 public:
  AutoregressiveCategorical() = default;
  AutoregressiveCategorical(std::vector<int> cardinalities, std::vector<int> order, double alpha);

  // Adds one fully observed row (values in column order, not model order).
  void observe(std::span<const int> x);

  int dim() const { return static_cast<int>(cards_.size()); }
  const std::vector<int>& cardinalities() const { return cards_; }
  const std::vector<int>& order() const { return order_; }
  double alpha() const { return alpha_; }

  // Conditional distribution of column order()[position] given the values of
  // the earlier columns in x.
  std::vector<double> conditional(std::size_t position, std::span<const int> x) const;
  double log_density(std::span<const int> x) const;
  std::vector<int> sample(numerics::Rng& rng) const;

  // Raw counts per position, keyed by the mixed-radix code of the prefix.
  using CountTable = std::unordered_map<std::uint64_t, std::vector<double>>;
  const std::vector<CountTable>& counts() const { return counts_; }
  void set_counts(std::size_t position, std::uint64_t prefix, std::vector<double> counts);

 private:
  std::uint64_t prefix_code(std::size_t position, std::span<const int> x) const;
  void check_row(std::span<const int> x) const;

  std::vector<int> cards_;
  std::vector<int> order_;
  double alpha_ = 1.0;
  std::vector<CountTable> counts_;
};

// Fits on rows of `data` (n x k integer codes). An empty order means the
// natural column order.
AutoregressiveCategorical fit_categorical(const Eigen::MatrixXi& data, const std::vector<int>& cardinalities,
                                          const std::vector<int>& order = {}, double alpha = 1.0);

}  // namespace fnf::density
