#include "fnf/density/model.hpp"

#include <cmath>

#include "fnf/errors.hpp"

namespace fnf::density {

namespace {

std::vector<int> to_codes(const Eigen::VectorXd& x) {
  std::vector<int> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double r = std::round(x[j]);
    if (std::abs(r - x[j]) > 1e-9) throw UsageError("categorical value is not an integer code");
    out[static_cast<std::size_t>(j)] = static_cast<int>(r);
  }
  return out;
}

}  // namespace

const GaussianMixture& DensityModel::gmm() const {
  if (!is_gmm()) throw UsageError("density model is not a Gaussian mixture");
  return std::get<GaussianMixture>(model_);
}

const AutoregressiveCategorical& DensityModel::categorical() const {
  if (!is_categorical()) throw UsageError("density model is not categorical");
  return std::get<AutoregressiveCategorical>(model_);
}

int DensityModel::dim() const {
  if (is_gmm()) return gmm().dim();
  if (is_categorical()) return categorical().dim();
  throw UsageError("density model is empty");
}

double DensityModel::log_density(const Eigen::VectorXd& x) const {
  if (is_gmm()) return gmm().log_density(x);
  return categorical().log_density(to_codes(x));
}

Eigen::VectorXd DensityModel::log_density_batch(const Eigen::MatrixXd& x) const {
  if (is_gmm()) return gmm().log_density_batch(x);
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = log_density(Eigen::VectorXd(x.row(i).transpose()));
  return out;
}

Eigen::MatrixXd DensityModel::sample(Eigen::Index n, numerics::Rng& rng) const {
  if (is_gmm()) return gmm().sample(n, rng);
  const auto& cat = categorical();
  if (n < 1) throw UsageError("sample count must be positive");
  Eigen::MatrixXd out(n, cat.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<int> row = cat.sample(rng);
    for (int j = 0; j < cat.dim(); ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace fnf::density
