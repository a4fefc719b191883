#pragma once

#include <limits>
#include <variant>

#include <Eigen/Dense>

#include "fnf/density/categorical.hpp"
#include "fnf/density/gmm.hpp"

namespace fnf::density {

struct DensityMetadata {
  int group = -1;  // sensitive group the model was fit on, -1 if none
  std::size_t sample_count = 0;
  double fit_log_likelihood = std::numeric_limits<double>::quiet_NaN();
  int floored_events = 0;
};

// Either a mixture over continuous features or a categorical model over
// integer codes. Categorical rows are passed as doubles holding integers.
class DensityModel {
 public:
  DensityModel() = default;
  DensityModel(GaussianMixture gmm, DensityMetadata meta) : model_(std::move(gmm)), meta_(meta) {}
  DensityModel(AutoregressiveCategorical cat, DensityMetadata meta) : model_(std::move(cat)), meta_(meta) {}

  bool is_gmm() const { return std::holds_alternative<GaussianMixture>(model_); }
  bool is_categorical() const { return std::holds_alternative<AutoregressiveCategorical>(model_); }
  const GaussianMixture& gmm() const;
  const AutoregressiveCategorical& categorical() const;
  const DensityMetadata& metadata() const { return meta_; }
  int dim() const;

  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd log_density_batch(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd sample(Eigen::Index n, numerics::Rng& rng) const;

 private:
  std::variant<std::monostate, GaussianMixture, AutoregressiveCategorical> model_;
  DensityMetadata meta_;
};

}  // namespace fnf::density
