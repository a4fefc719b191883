#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fnf/numerics/autodiff.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::density {

// Full-covariance Gaussian mixture. Points are rows of the input matrices.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  // weights: K, means: K x d, covariances: K matrices of d x d.
  GaussianMixture(Eigen::VectorXd weights, Eigen::MatrixXd means, std::vector<Eigen::MatrixXd> covariances);

  int components() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }
  const std::vector<Eigen::MatrixXd>& cholesky_factors() const { return cholesky_; }

  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd log_density_batch(const Eigen::MatrixXd& x) const;
  // Also returns d log p / d x, row per point.
  Eigen::VectorXd log_density_batch(const Eigen::MatrixXd& x, Eigen::MatrixXd* grad_x) const;
  // Posterior component probabilities, n x K.
  Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& x) const;

  Eigen::MatrixXd sample(Eigen::Index n, numerics::Rng& rng) const;

 private:
  // n x K matrix of log w_k + log N(x | mu_k, Sigma_k).
  Eigen::MatrixXd component_log_densities(const Eigen::MatrixXd& x) const;

  Eigen::VectorXd weights_;
  Eigen::MatrixXd means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> cholesky_;
  Eigen::VectorXd log_norm_;  // log w_k - d/2 log 2pi - log|L_k|
  Eigen::VectorXd cumulative_;
};

struct GmmFitOptions {
  int max_iters = 300;
  // Stop once the per-sample log-likelihood improves by less than this.
  double tol = 1e-8;
  int restarts = 5;
  // Lower bound on every covariance eigenvalue.
  double variance_floor = 1e-6;
};

struct GmmFit {
  GaussianMixture model;
  // Per-sample log-likelihood after each EM iteration of the kept restart.
  std::vector<double> log_likelihood_trace;
  // Number of M-steps in which a covariance eigenvalue had to be floored.
  int floored_events = 0;
  int iterations = 0;
  bool converged = false;
};

// EM with k-means++ seeding; the restart with the best final log-likelihood
// is kept. Throws UsageError when n < K.
GmmFit fit_gmm(const Eigen::MatrixXd& data, int components, numerics::Rng& rng, const GmmFitOptions& options = {});

// Tape primitive: per-row log density (n x 1) with gradient w.r.t. x.
ad::Var gmm_log_density(const ad::Var& x, const GaussianMixture& gmm);

}  // namespace fnf::density
