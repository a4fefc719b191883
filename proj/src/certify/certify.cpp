#include "fnf/certify/certify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::certify {

OptimalAdversary::OptimalAdversary(const flow::FlowEncoderPair& pair, const density::DensityModel& p0,
                                   const density::DensityModel& p1)
    : pair_(&pair), p0_(&p0), p1_(&p1) {
  if (p0.dim() != pair.f0.dim() || p1.dim() != pair.f1.dim()) {
    throw UsageError("adversary densities do not match the encoder dimension");
  }
}

Eigen::MatrixXd OptimalAdversary::latent_log_densities(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd out(z.rows(), 2);
  out.col(0) = flow::latent_log_density(pair_->f0, *p0_, z);
  out.col(1) = flow::latent_log_density(pair_->f1, *p1_, z);
  return out;
}

Eigen::VectorXi OptimalAdversary::predict(const Eigen::MatrixXd& z) const {
  const Eigen::MatrixXd lp = latent_log_densities(z);
  if (!lp.array().isNaN().any()) return (lp.col(1).array() >= lp.col(0).array()).cast<int>().matrix();
  throw NumericError("latent log-density is NaN");
}

int OptimalAdversary::predict(const Eigen::VectorXd& z) const { return predict(Eigen::MatrixXd(z.transpose()))[0]; }

Eigen::MatrixXd OptimalAdversary::sample_latents(int group, Eigen::Index n, numerics::Rng& rng) const {
  const Eigen::MatrixXd x = base(group).sample(n, rng);
  return pair_->encoder(group).forward(x).value;
}

double estimate_delta(const LatentClassifier& mu, const LatentSampler& sample0, const LatentSampler& sample1,
                      Eigen::Index n, numerics::Rng& rng) {
  if (n < 1) throw UsageError("sample count must be positive");
  // Chunked so memory stays bounded for large n.
  const Eigen::Index chunk = 8192;
  double sum0 = 0, sum1 = 0;
  for (Eigen::Index done = 0; done < n; done += chunk) {
    const Eigen::Index m = std::min(chunk, n - done);
    sum0 += mu(sample0(m, rng)).cast<double>().sum();
    sum1 += mu(sample1(m, rng)).cast<double>().sum();
  }
  return std::abs(sum0 - sum1) / static_cast<double>(n);
}

double estimate_delta(const OptimalAdversary& adversary, Eigen::Index n, numerics::Rng& rng) {
  return estimate_delta([&](const Eigen::MatrixXd& z) { return adversary.predict(z); },
                        [&](Eigen::Index m, numerics::Rng& r) { return adversary.sample_latents(0, m, r); },
                        [&](Eigen::Index m, numerics::Rng& r) { return adversary.sample_latents(1, m, r); }, n, rng);
}

namespace {

double hoeffding_numerator(double delta) {
  if (!(delta > 0 && delta < 1)) throw UsageError("delta must lie in (0, 1)");
  return -2.0 * std::log((1.0 - std::sqrt(1.0 - delta)) / 2.0);
}

}  // namespace

std::int64_t required_samples(double epsilon, double delta) {
  if (!(epsilon > 0 && epsilon < 1)) throw UsageError("epsilon must lie in (0, 1)");
  return static_cast<std::int64_t>(std::ceil(hoeffding_numerator(delta) / (epsilon * epsilon)));
}

double hoeffding_epsilon(std::int64_t n, double delta) {
  if (n < 1) throw UsageError("sample count must be positive");
  return std::sqrt(hoeffding_numerator(delta) / static_cast<double>(n));
}

double max_adversarial_accuracy(double delta_hat, double epsilon) {
  return (1.0 + std::clamp(delta_hat + epsilon, 0.0, 1.0)) / 2.0;
}

CertificationReport certify(const OptimalAdversary& adversary, std::int64_t n, double delta, numerics::Rng& rng,
                            const std::optional<LabelDensities>& label_densities) {
  CertificationReport report;
  report.n = n;
  report.delta = delta;
  report.epsilon = hoeffding_epsilon(n, delta);
  numerics::Rng main = rng.split("certify.delta");
  report.delta_hat = estimate_delta(adversary, n, main);
  report.max_adv_acc = max_adversarial_accuracy(report.delta_hat, report.epsilon);
  report.demographic_parity_bound = std::min(1.0, report.delta_hat + report.epsilon);
  if (label_densities) {
    std::array<double, 2> per_label{};
    for (int y = 0; y < 2; ++y) {
      const auto* q0 = (*label_densities)[0][static_cast<std::size_t>(y)];
      const auto* q1 = (*label_densities)[1][static_cast<std::size_t>(y)];
      if (q0 == nullptr || q1 == nullptr) throw UsageError("missing label-conditional density");
      const OptimalAdversary conditional(adversary.pair(), *q0, *q1);
      numerics::Rng r = rng.split(static_cast<std::uint64_t>(100 + y));
      per_label[static_cast<std::size_t>(y)] = estimate_delta(conditional, n, r);
    }
    report.label_delta_hat = per_label;
    report.equalized_odds_bound = std::min(1.0, std::max(per_label[0], per_label[1]) + report.epsilon);
  }
  return report;
}

CertificationReport certify_exact(double distance) {
  if (!(distance >= 0 && distance <= 1 + 1e-12)) throw UsageError("distance must lie in [0, 1]");
  CertificationReport report;
  report.delta_hat = std::min(1.0, distance);
  report.max_adv_acc = max_adversarial_accuracy(report.delta_hat, 0.0);
  report.demographic_parity_bound = report.delta_hat;
  return report;
}

}  // namespace fnf::certify
