#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "fnf/certify/attack.hpp"
#include "fnf/certify/certify.hpp"
#include "fnf/data/synthetic.hpp"
#include "fnf/errors.hpp"

namespace fnf::certify {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

density::DensityModel normal_1d(double mean) {
  return density::DensityModel(
      density::GaussianMixture(VectorXd::Ones(1), MatrixXd::Constant(1, 1, mean), {MatrixXd::Identity(1, 1)}), {});
}

// Small nets: the flows are the identity either way.
flow::FlowEncoderPair identity_pair(int dim) {
  flow::FlowConfig cfg;
  cfg.dim = dim;
  cfg.blocks = 1;
  cfg.hidden = {2};
  numerics::Rng rng(0);
  return flow::FlowEncoderPair(cfg, rng);
}

// Total variation of N(-1,1) and N(1,1) by composite Simpson on [-12, 12].
double tv_unit_gaussians_by_quadrature() {
  const int m = 24000;
  const double lo = -12, hi = 12, h = (hi - lo) / m;
  auto f = [](double x) {
    const double c = 1 / std::sqrt(2 * std::numbers::pi);
    return std::abs(c * std::exp(-0.5 * (x + 1) * (x + 1)) - c * std::exp(-0.5 * (x - 1) * (x - 1)));
  };
  double s = f(lo) + f(hi);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4 : 2) * f(lo + i * h);
  return 0.5 * s * h / 3;
}

TEST(Oracle, UnitGaussianDistanceAgreesWithClosedForm) {
  // 2 Phi(1) - 1 = erf(1 / sqrt 2).
  EXPECT_NEAR(tv_unit_gaussians_by_quadrature(), std::erf(1 / std::sqrt(2.0)), 1e-9);
  EXPECT_NEAR(tv_unit_gaussians_by_quadrature(), 0.682689492137086, 1e-9);
}

TEST(OptimalAdversary, MidpointRuleForShiftedGaussians) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(0), p1 = normal_1d(2);
  const OptimalAdversary adv(pair, p0, p1);
  for (double z : {-3.0, 0.0, 0.99, 1.01, 2.0, 5.0}) {
    const VectorXd point = VectorXd::Constant(1, z);
    EXPECT_EQ(adv.predict(point), z > 1 ? 1 : 0) << z;
  }
  // The tie at the midpoint goes to group 1.
  const VectorXd midpoint = VectorXd::Constant(1, 1.0);
  EXPECT_EQ(adv.predict(midpoint), 1);
}

TEST(OptimalAdversary, IdenticalDensitiesAlwaysPredictOne) {
  const auto pair = identity_pair(1);
  const auto p = normal_1d(0.5);
  const OptimalAdversary adv(pair, p, p);
  numerics::Rng rng(1);
  const MatrixXd z = 4 * p.sample(500, rng);
  EXPECT_EQ(adv.predict(z).sum(), 500);
  numerics::Rng r(2);
  const double d = estimate_delta(adv, 10000, r);
  EXPECT_LT(d, 0.03);
  EXPECT_EQ(d, 0.0);
}

TEST(OptimalAdversary, NanLatentThrows) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(0), p1 = normal_1d(1);
  const OptimalAdversary adv(pair, p0, p1);
  MatrixXd z(1, 1);
  z(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adv.predict(z), NumericError);
}

TEST(OptimalAdversary, RejectsDimensionMismatch) {
  const auto pair = identity_pair(2);
  const auto p0 = normal_1d(0), p1 = normal_1d(1);
  EXPECT_THROW(OptimalAdversary(pair, p0, p1), UsageError);
}

TEST(EstimateDelta, UnitGaussiansMatchOracle) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(-1), p1 = normal_1d(1);
  const OptimalAdversary adv(pair, p0, p1);
  numerics::Rng rng(3);
  EXPECT_NEAR(estimate_delta(adv, 100000, rng), 0.682689492137086, 0.01);
}

TEST(EstimateDelta, DisjointDiscreteGroupsGiveOne) {
  const LatentSampler s0 = [](Eigen::Index n, numerics::Rng&) { return MatrixXd::Zero(n, 1); };
  const LatentSampler s1 = [](Eigen::Index n, numerics::Rng&) { return MatrixXd::Ones(n, 1); };
  const LatentClassifier mu = [](const MatrixXd& z) { return (z.col(0).array() > 0.5).cast<int>().matrix().eval(); };
  numerics::Rng rng(4);
  EXPECT_EQ(estimate_delta(mu, s0, s1, 20000, rng), 1.0);
  EXPECT_THROW(estimate_delta(mu, s0, s1, 0, rng), UsageError);
}

TEST(EstimateDelta, DoublingSamplesStaysInsideTheBand) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(-0.5), p1 = normal_1d(0.5);
  const OptimalAdversary adv(pair, p0, p1);
  numerics::Rng r1(5), r2(6);
  const double a = estimate_delta(adv, 20000, r1);
  const double b = estimate_delta(adv, 40000, r2);
  EXPECT_LT(std::abs(a - b), hoeffding_epsilon(20000, 0.05));
}

TEST(Hoeffding, RequiredSamplesMatchesFormula) {
  // -2 ln(0.25) / 0.01 = 277.26
  EXPECT_EQ(required_samples(0.1, 0.75), 278);
  EXPECT_THROW(required_samples(0.0, 0.5), UsageError);
  EXPECT_THROW(required_samples(0.1, 1.0), UsageError);
  EXPECT_THROW(hoeffding_epsilon(0, 0.5), UsageError);
}

TEST(Hoeffding, HalvingEpsilonQuadruplesSamples) {
  for (double eps : {0.2, 0.05, 0.013}) {
    for (double delta : {0.05, 0.25, 0.75}) {
      // Invert exactly: n(eps) = c / eps^2, so eps(n / 4) = 2 eps(n).
      const double n = 1e6;
      EXPECT_NEAR(hoeffding_epsilon(static_cast<std::int64_t>(n / 4), delta), 2 * hoeffding_epsilon(1000000, delta),
                  1e-12);
      const auto n1 = required_samples(eps, delta), n2 = required_samples(eps / 2, delta);
      EXPECT_LE(std::abs(static_cast<double>(n2) - 4.0 * static_cast<double>(n1)), 4.0);
      EXPECT_LE(hoeffding_epsilon(n1, delta), eps);
      EXPECT_GT(hoeffding_epsilon(n1 - 1, delta), eps);
    }
  }
}

TEST(Hoeffding, CoverageOnKnownPair) {
  // 1000 repetitions at (eps, delta) = (0.05, 0.1) with n from the formula.
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(-1), p1 = normal_1d(1);
  const OptimalAdversary adv(pair, p0, p1);
  const double truth = 0.682689492137086;
  const auto n = required_samples(0.05, 0.1);
  numerics::Rng rng(7);
  int covered = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    numerics::Rng r = rng.split(static_cast<std::uint64_t>(rep));
    if (truth <= estimate_delta(adv, n, r) + 0.05) ++covered;
  }
  EXPECT_GE(covered, 900);
}

TEST(MaxAdversarialAccuracy, FormulaAndClamp) {
  EXPECT_DOUBLE_EQ(max_adversarial_accuracy(0.0, 0.01), 0.505);
  EXPECT_DOUBLE_EQ(max_adversarial_accuracy(0.95, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(max_adversarial_accuracy(0.23, 0.0), 0.615);
}

TEST(Certify, ReportIsConsistent) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(-1), p1 = normal_1d(1);
  const OptimalAdversary adv(pair, p0, p1);
  numerics::Rng rng(8);
  const CertificationReport r = certify(adv, 50000, 0.05, rng);
  EXPECT_EQ(r.n, 50000);
  EXPECT_DOUBLE_EQ(r.epsilon, hoeffding_epsilon(50000, 0.05));
  EXPECT_DOUBLE_EQ(r.max_adv_acc, max_adversarial_accuracy(r.delta_hat, r.epsilon));
  EXPECT_DOUBLE_EQ(r.demographic_parity_bound, r.delta_hat + r.epsilon);
  EXPECT_NEAR(r.delta_hat, 0.682689492137086, 0.015);
  EXPECT_FALSE(r.label_delta_hat.has_value());
  numerics::Rng again(8);
  EXPECT_EQ(certify(adv, 50000, 0.05, again).delta_hat, r.delta_hat);
}

TEST(Certify, LabelConditionalDistances) {
  const auto pair = identity_pair(1);
  const auto p0 = normal_1d(-1), p1 = normal_1d(1);
  const auto same = normal_1d(0), far0 = normal_1d(-3), far1 = normal_1d(3);
  const OptimalAdversary adv(pair, p0, p1);
  // y = 0 cells coincide, y = 1 cells are far apart.
  const LabelDensities cells{{{&same, &far0}, {&same, &far1}}};
  numerics::Rng rng(9);
  const CertificationReport r = certify(adv, 20000, 0.05, rng, cells);
  ASSERT_TRUE(r.label_delta_hat.has_value());
  EXPECT_EQ((*r.label_delta_hat)[0], 0.0);
  EXPECT_NEAR((*r.label_delta_hat)[1], std::erf(3 / std::sqrt(2.0)), 0.02);
  EXPECT_DOUBLE_EQ(*r.equalized_odds_bound, std::min(1.0, (*r.label_delta_hat)[1] + r.epsilon));
  const LabelDensities missing{{{&same, nullptr}, {&same, &far1}}};
  EXPECT_THROW(certify(adv, 100, 0.05, rng, missing), UsageError);
}

TEST(Certify, ExactDistanceHasNoSamplingMargin) {
  const CertificationReport r = certify_exact(0.2);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_DOUBLE_EQ(r.max_adv_acc, 0.6);
  EXPECT_THROW(certify_exact(1.5), UsageError);
}

TEST(Attack, RawSyntheticGroupsAreRecoverable) {
  const data::TabularDataset train = data::make_synthetic(1000, 50);
  const data::TabularDataset test = data::make_synthetic(500, 51);
  AttackOptions opts;
  opts.seeds = {0, 1};
  opts.fit.epochs = 10;
  const AttackResult r = attack_mlp(train.x, train.a, test.x, test.a, {50, 50}, opts);
  EXPECT_EQ(r.architecture, "2x50");
  ASSERT_EQ(r.seed_accuracy.size(), 2u);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_GT(r.max_accuracy, 0.98);
}

TEST(Attack, IndistinguishableGroupsStayNearChance) {
  // Same distribution for both groups: balanced accuracy is chance level.
  numerics::Rng rng(52);
  MatrixXd z(4000, 2);
  Eigen::VectorXi a(4000);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z(i, 0) = rng.normal();
    z(i, 1) = rng.normal();
    a[i] = static_cast<int>(i % 2);
  }
  AttackOptions opts;
  opts.seeds = {0};
  opts.fit.epochs = 5;
  const AttackResult r = attack_mlp(z.topRows(3000), a.head(3000), z.bottomRows(1000), a.tail(1000), {8}, opts);
  EXPECT_NEAR(r.max_accuracy, 0.5, 0.06);
}

TEST(Attack, DefaultSuite) {
  const auto suite = default_attack_architectures();
  ASSERT_EQ(suite.size(), 3u);
  EXPECT_EQ(suite[0], std::vector<int>{8});
  EXPECT_EQ(suite[1], (std::vector<int>{50, 50}));
  EXPECT_EQ(suite[2], (std::vector<int>{200, 200, 200}));
}

}  // namespace
}  // namespace fnf::certify
