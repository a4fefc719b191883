#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/density/model.hpp"
#include "fnf/flow/encoder.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::certify {

// Likelihood-ratio adversary on latents: predicts a = 1 iff
// p_{Z_1}(z) >= p_{Z_0}(z). Holds references; the pair and densities must
// outlive it.
class OptimalAdversary {
 public:
  OptimalAdversary(const flow::FlowEncoderPair& pair, const density::DensityModel& p0,
                   const density::DensityModel& p1);

  Eigen::VectorXi predict(const Eigen::MatrixXd& z) const;
  int predict(const Eigen::VectorXd& z) const;
  // Latent log-densities under both groups, n x 2.
  Eigen::MatrixXd latent_log_densities(const Eigen::MatrixXd& z) const;

  // Fresh latent samples z = f_a(x), x ~ p_a.
  Eigen::MatrixXd sample_latents(int group, Eigen::Index n, numerics::Rng& rng) const;

  const flow::FlowEncoderPair& pair() const { return *pair_; }
  const density::DensityModel& base(int group) const { return group == 0 ? *p0_ : *p1_; }

 private:
  const flow::FlowEncoderPair* pair_;
  const density::DensityModel* p0_;
  const density::DensityModel* p1_;
};

using LatentSampler = std::function<Eigen::MatrixXd(Eigen::Index, numerics::Rng&)>;
using LatentClassifier = std::function<Eigen::VectorXi(const Eigen::MatrixXd&)>;

// |mean mu(z_0) - mean mu(z_1)| over n fresh samples per group.
double estimate_delta(const LatentClassifier& mu, const LatentSampler& sample0, const LatentSampler& sample1,
                      Eigen::Index n, numerics::Rng& rng);
double estimate_delta(const OptimalAdversary& adversary, Eigen::Index n, numerics::Rng& rng);

// Smallest n with n >= -2 ln((1 - sqrt(1 - delta)) / 2) / eps^2.
std::int64_t required_samples(double epsilon, double delta);
// The epsilon that n samples guarantee at confidence 1 - delta.
double hoeffding_epsilon(std::int64_t n, double delta);

// (1 + min(1, delta_hat + epsilon)) / 2.
double max_adversarial_accuracy(double delta_hat, double epsilon);

struct AttackResult {
  std::string architecture;
  std::vector<double> seed_accuracy;  // balanced accuracy per seed, NaN if diverged
  std::vector<std::string> failures;
  double max_accuracy = 0.0;
};

struct CertificationReport {
  double delta_hat = 0.0;
  std::int64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double max_adv_acc = 0.5;
  double demographic_parity_bound = 0.0;
  // Distance between the groups' latents conditioned on the true label,
  // when label-conditional densities are supplied.
  std::optional<std::array<double, 2>> label_delta_hat;
  std::optional<double> equalized_odds_bound;
  std::vector<AttackResult> attacks;
};

// Label-conditional base densities p_{a,y}, indexed [a][y].
using LabelDensities = std::array<std::array<const density::DensityModel*, 2>, 2>;

CertificationReport certify(const OptimalAdversary& adversary, std::int64_t n, double delta, numerics::Rng& rng,
                            const std::optional<LabelDensities>& label_densities = std::nullopt);

// Builds a report from an exactly known distance (discrete matchings).
CertificationReport certify_exact(double distance);

}  // namespace fnf::certify
