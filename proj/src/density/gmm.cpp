#include "fnf/density/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::density {

namespace {

Eigen::VectorXd row_logsumexp(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    if (!std::isfinite(mx)) {
      out[i] = mx;
      continue;
    }
    out[i] = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

// Symmetrizes and floors eigenvalues; returns true if a floor was applied.
bool floor_covariance(Eigen::MatrixXd& cov, double floor) {
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of a covariance failed");
  if (es.eigenvalues().minCoeff() >= floor) return false;
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(floor);
  cov = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose());
  return true;
}

}  // namespace

GaussianMixture::GaussianMixture(Eigen::VectorXd weights, Eigen::MatrixXd means,
                                 std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  const Eigen::Index k = weights_.size();
  if (k == 0) throw UsageError("mixture needs at least one component");
  if (means_.rows() != k || static_cast<Eigen::Index>(covariances_.size()) != k) {
    throw UsageError("mixture component counts disagree");
  }
  if ((weights_.array() <= 0).any()) throw UsageError("mixture weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > 1e-9) throw UsageError("mixture weights must sum to one");
  weights_ /= weights_.sum();
  const Eigen::Index d = means_.cols();
  cholesky_.reserve(static_cast<std::size_t>(k));
  log_norm_.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::MatrixXd& cov = covariances_[static_cast<std::size_t>(c)];
    if (cov.rows() != d || cov.cols() != d) throw UsageError("covariance shape mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("covariance of component " + std::to_string(c) + " is not positive definite");
    }
    cholesky_.push_back(llt.matrixL());
    const double log_det_l = cholesky_.back().diagonal().array().log().sum();
    log_norm_[c] = std::log(weights_[c]) - 0.5 * static_cast<double>(d) * std::log(2 * std::numbers::pi) - log_det_l;
  }
  cumulative_.resize(k);
  double acc = 0;
  for (Eigen::Index c = 0; c < k; ++c) cumulative_[c] = (acc += weights_[c]);
}

Eigen::MatrixXd GaussianMixture::component_log_densities(const Eigen::MatrixXd& x) const {
  if (x.cols() != dim()) throw UsageError("point dimension does not match the mixture");
  Eigen::MatrixXd out(x.rows(), components());
  for (int c = 0; c < components(); ++c) {
    Eigen::MatrixXd centered = (x.rowwise() - means_.row(c)).transpose();
    cholesky_[static_cast<std::size_t>(c)].triangularView<Eigen::Lower>().solveInPlace(centered);
    out.col(c) = (log_norm_[c] - 0.5 * centered.colwise().squaredNorm().array()).matrix().transpose();
  }
  return out;
}

double GaussianMixture::log_density(const Eigen::VectorXd& x) const {
  return log_density_batch(Eigen::MatrixXd(x.transpose()))[0];
}

Eigen::VectorXd GaussianMixture::log_density_batch(const Eigen::MatrixXd& x) const {
  return row_logsumexp(component_log_densities(x));
}

Eigen::VectorXd GaussianMixture::log_density_batch(const Eigen::MatrixXd& x, Eigen::MatrixXd* grad_x) const {
  const Eigen::MatrixXd comp = component_log_densities(x);
  const Eigen::VectorXd lse = row_logsumexp(comp);
  if (grad_x != nullptr) {
    grad_x->setZero(x.rows(), x.cols());
    for (int c = 0; c < components(); ++c) {
      const Eigen::ArrayXd r = (comp.col(c) - lse).array().exp();
      // Sigma^{-1} (x - mu) = L^{-T} L^{-1} (x - mu)
      Eigen::MatrixXd centered = (x.rowwise() - means_.row(c)).transpose();
      const auto& l = cholesky_[static_cast<std::size_t>(c)];
      l.triangularView<Eigen::Lower>().solveInPlace(centered);
      l.transpose().triangularView<Eigen::Upper>().solveInPlace(centered);
      *grad_x -= (centered.transpose().array().colwise() * r).matrix();
    }
  }
  return lse;
}

Eigen::MatrixXd GaussianMixture::responsibilities(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd comp = component_log_densities(x);
  const Eigen::VectorXd lse = row_logsumexp(comp);
  return (comp.colwise() - lse).array().exp().matrix();
}

Eigen::MatrixXd GaussianMixture::sample(Eigen::Index n, numerics::Rng& rng) const {
  if (n < 1) throw UsageError("sample count must be positive");
  Eigen::MatrixXd out(n, dim());
  Eigen::VectorXd eps(dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    int c = 0;
    while (c + 1 < components() && u >= cumulative_[c]) ++c;
    for (int j = 0; j < dim(); ++j) eps[j] = rng.normal();
    out.row(i) = means_.row(c) + (cholesky_[static_cast<std::size_t>(c)] * eps).transpose();
  }
  return out;
}

namespace {

struct EmRun {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  std::vector<Eigen::MatrixXd> covs;
  std::vector<double> trace;
  int floored = 0;
  int iterations = 0;
  bool converged = false;
};

// Weighted M-step from responsibilities (n x K).
void m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, double floor, EmRun& run) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k = resp.cols();
  const double tiny = 10 * std::numeric_limits<double>::epsilon();
  Eigen::VectorXd nk = resp.colwise().sum().transpose().array() + tiny;
  run.weights = nk / nk.sum();
  run.means = (resp.transpose() * x).array().colwise() / nk.array();
  run.covs.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::MatrixXd centered = x.rowwise() - run.means.row(c);
    Eigen::MatrixXd cov = (centered.array().colwise() * resp.col(c).array()).matrix().transpose() * centered / nk[c];
    if (d > 0 && floor_covariance(cov, floor)) ++run.floored;
    run.covs[static_cast<std::size_t>(c)] = std::move(cov);
  }
  (void)n;
}

EmRun run_em(const Eigen::MatrixXd& x, int k, numerics::Rng& rng, const GmmFitOptions& opt) {
  const Eigen::Index n = x.rows();
  // k-means++ seeding.
  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Eigen::VectorXd dist2 = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total <= 0) {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    } else {
      double u = rng.uniform() * total;
      while (pick + 1 < n && u >= dist2[pick]) u -= dist2[pick++];
    }
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double dd = (x.row(i) - x.row(centers[static_cast<std::size_t>(c)])).squaredNorm();
      if (dd < bd) {
        bd = dd;
        best = c;
      }
    }
    resp(i, best) = 1.0;
  }

  EmRun run;
  m_step(x, resp, opt.variance_floor, run);
  for (int it = 0; it < opt.max_iters; ++it) {
    const GaussianMixture g(run.weights, run.means, run.covs);
    const Eigen::MatrixXd comp = [&] {
      Eigen::MatrixXd r = g.responsibilities(x);
      return r;
    }();
    const double ll = g.log_density_batch(x).mean();
    if (!std::isfinite(ll)) throw NumericError("EM produced a non-finite log-likelihood");
    run.trace.push_back(ll);
    run.iterations = it + 1;
    if (run.trace.size() >= 2 && run.trace.back() - run.trace[run.trace.size() - 2] < opt.tol) {
      run.converged = true;
      break;
    }
    m_step(x, comp, opt.variance_floor, run);
  }
  return run;
}

}  // namespace

GmmFit fit_gmm(const Eigen::MatrixXd& data, int components, numerics::Rng& rng, const GmmFitOptions& options) {
  if (components < 1) throw UsageError("component count must be positive");
  if (data.cols() < 1) throw UsageError("GMM needs at least one feature");
  if (data.rows() < components) {
    throw UsageError("GMM needs at least as many points as components (n=" + std::to_string(data.rows()) +
                     ", K=" + std::to_string(components) + ")");
  }
  if (!data.allFinite()) throw NumericError("GMM input contains non-finite values");
  const int restarts = std::max(1, options.restarts);
  EmRun best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    numerics::Rng sub = rng.split(static_cast<std::uint64_t>(r));
    EmRun run = run_em(data, components, sub, options);
    if (!have || run.trace.back() > best.trace.back()) {
      best = std::move(run);
      have = true;
    }
    // A single component has a unique fixed point.
    if (components == 1) break;
  }
  GmmFit fit{GaussianMixture(best.weights, best.means, best.covs), best.trace, best.floored, best.iterations,
             best.converged};
  return fit;
}

ad::Var gmm_log_density(const ad::Var& x, const GaussianMixture& gmm) {
  Eigen::MatrixXd grad;
  Eigen::VectorXd values = gmm.log_density_batch(x.value(), &grad);
  if (!values.allFinite()) throw NumericError("non-finite mixture log-density");
  return x.tape().record(Eigen::MatrixXd(values), {x}, [x, grad = std::move(grad)](ad::Tape& tp, const ad::Matrix& g) {
    tp.accumulate(x, (grad.array().colwise() * g.col(0).array()).matrix());
  });
}

}  // namespace fnf::density
