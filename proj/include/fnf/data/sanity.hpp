#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/data/loaders.hpp"
#include "fnf/downstream/classifier.hpp"

namespace fnf::data {

// Numeric design matrix for a plain classifier: categorical columns one-hot,
// continuous columns standardized with training statistics.
class DesignEncoder {
 public:
  static DesignEncoder fit(const TabularDataset& train);
  Eigen::MatrixXd apply(const TabularDataset& ds) const;
  int width() const { return width_; }

 private:
  std::vector<int> cardinality_;  // 0 for continuous columns
  Eigen::RowVectorXd mean_, scale_;
  int width_ = 0;
};

struct SanityOptions {
  std::vector<int> hidden = {50, 50};
  int seeds = 5;
  downstream::FitOptions fit{.epochs = 20};
};

struct SanityResult {
  std::string dataset;
  std::vector<double> original, preprocessed;  // test accuracy per seed
  double original_mean = 0, original_std = 0;
  double preprocessed_mean = 0, preprocessed_std = 0;
};

// Trains the same MLP on the original and the preprocessed variant of a
// dataset, one run per seed, and reports test accuracy.
SanityResult preprocessing_sanity(const std::string& name, const LoadConfig& config, const SanityOptions& options = {});

}  // namespace fnf::data
