#include <cmath>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "fnf/density/categorical.hpp"
#include "fnf/density/gmm.hpp"
#include "fnf/density/model.hpp"
#include "fnf/errors.hpp"
#include "fnf/numerics/optim.hpp"

namespace fnf::density {
namespace {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

GaussianMixture two_cluster_truth() {
  VectorXd w(2);
  w << 0.3, 0.7;
  MatrixXd mu(2, 2);
  mu << -4, 0, 3, 1;
  MatrixXd c0(2, 2), c1(2, 2);
  c0 << 1.0, 0.3, 0.3, 0.5;
  c1 << 0.6, -0.2, -0.2, 1.2;
  return GaussianMixture(w, mu, {c0, c1});
}

TEST(Gmm, StandardNormalAtOrigin) {
  const GaussianMixture g(VectorXd::Ones(1), MatrixXd::Zero(1, 1), {MatrixXd::Identity(1, 1)});
  EXPECT_NEAR(g.log_density(VectorXd(VectorXd::Zero(1))), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
}

TEST(Gmm, MatchesHandComputedMixture) {
  const GaussianMixture g = two_cluster_truth();
  VectorXd x(2);
  x << 0.5, -0.25;
  double p = 0;
  for (int k = 0; k < 2; ++k) {
    const MatrixXd& c = g.covariances()[static_cast<std::size_t>(k)];
    const VectorXd dx = x - g.means().row(k).transpose();
    const double q = dx.dot(c.inverse() * dx);
    p += g.weights()[k] * std::exp(-0.5 * q) / (2 * std::numbers::pi * std::sqrt(c.determinant()));
  }
  EXPECT_NEAR(g.log_density(x), std::log(p), 1e-12);
}

TEST(Gmm, RejectsInvalidParameters) {
  EXPECT_THROW(GaussianMixture(VectorXd::Constant(1, 0.5), MatrixXd::Zero(1, 1), {MatrixXd::Identity(1, 1)}),
               UsageError);
  EXPECT_THROW(GaussianMixture(VectorXd::Ones(1), MatrixXd::Zero(1, 1), {-MatrixXd::Identity(1, 1)}), NumericError);
}

TEST(Gmm, SampleMeanMatches) {
  const GaussianMixture g = two_cluster_truth();
  numerics::Rng rng(3);
  const MatrixXd s = g.sample(100000, rng);
  const VectorXd expected = g.means().transpose() * g.weights();
  EXPECT_LT((s.colwise().mean().transpose() - expected).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Gmm, SamplingIsSeedDeterministic) {
  const GaussianMixture g = two_cluster_truth();
  numerics::Rng a(9), b(9);
  EXPECT_EQ(g.sample(50, a), g.sample(50, b));
}

TEST(Gmm, HistogramMatchesDensity) {
  VectorXd w(2);
  w << 0.4, 0.6;
  MatrixXd mu(2, 1);
  mu << -1.5, 2.0;
  const GaussianMixture g(w, mu, {MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 1.5)});
  numerics::Rng rng(17);
  const int n = 1000000;
  const MatrixXd s = g.sample(n, rng);
  const double lo = -6, hi = 7;
  const int bins = 130;
  const double width = (hi - lo) / bins;
  std::vector<double> hist(bins, 0.0);
  double outside = 0;
  for (int i = 0; i < n; ++i) {
    const int b = static_cast<int>(std::floor((s(i, 0) - lo) / width));
    if (b < 0 || b >= bins) {
      outside += 1.0 / n;
      continue;
    }
    hist[static_cast<std::size_t>(b)] += 1.0 / n;
  }
  // Bin masses by Simpson's rule on the density.
  double tv = outside;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * width;
    auto p = [&](double x) { return std::exp(g.log_density(VectorXd(VectorXd::Constant(1, x)))); };
    const double mass = width / 6 * (p(a) + 4 * p(a + width / 2) + p(a + width));
    tv += std::abs(mass - hist[static_cast<std::size_t>(b)]);
  }
  EXPECT_LT(0.5 * tv, 0.02);
}

TEST(Gmm, InputGradientMatchesFiniteDifferences) {
  const GaussianMixture g = two_cluster_truth();
  for (const auto& pt : {VectorXd::Zero(2).eval(), VectorXd::Constant(2, 1.5).eval(), VectorXd::Constant(2, -3.0).eval()}) {
    auto f = [&](const VectorXd& x) {
      MatrixXd grad;
      const double v = g.log_density_batch(MatrixXd(x.transpose()), &grad)[0];
      return numerics::GradResult{v, grad.row(0).transpose()};
    };
    EXPECT_LT(numerics::grad_check(f, pt), 1e-6);
  }
}

TEST(Gmm, TapeOpPropagatesGradient) {
  const GaussianMixture g = two_cluster_truth();
  MatrixXd x(3, 2);
  x << 0, 0, 1, -1, -2, 0.5;
  ad::Tape tape;
  auto xv = tape.leaf(x);
  auto loss = ad::sum(gmm_log_density(xv, g) * 2.0);
  tape.backward(loss);
  MatrixXd grad;
  g.log_density_batch(x, &grad);
  EXPECT_LT((tape.grad(xv) - 2 * grad).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GmmFit, RecoversTwoClusters) {
  const GaussianMixture truth = two_cluster_truth();
  numerics::Rng rng(5);
  const MatrixXd data = truth.sample(20000, rng);
  const GmmFit fit = fit_gmm(data, 2, rng);
  // Align components by mean.
  const int first = fit.model.means()(0, 0) < fit.model.means()(1, 0) ? 0 : 1;
  for (int k = 0; k < 2; ++k) {
    const int fk = k == 0 ? first : 1 - first;
    EXPECT_LT((fit.model.means().row(fk) - truth.means().row(k)).cwiseAbs().maxCoeff(), 0.2);
    EXPECT_NEAR(fit.model.weights()[fk], truth.weights()[k], 0.05);
  }
}

TEST(GmmFit, SingleComponentIsSampleMoments) {
  numerics::Rng rng(8);
  MatrixXd data(50, 3);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal() * (1 + i % 3);
  const GmmFit fit = fit_gmm(data, 1, rng);
  const VectorXd mean = data.colwise().mean().transpose();
  const MatrixXd centered = data.rowwise() - mean.transpose();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows());
  EXPECT_LT((fit.model.means().row(0).transpose() - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((fit.model.covariances()[0] - cov).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(fit.floored_events, 0);
}

TEST(GmmFit, LogLikelihoodIsMonotone) {
  numerics::Rng rng(21);
  const MatrixXd data = two_cluster_truth().sample(3000, rng);
  for (int k : {2, 3, 5}) {
    GmmFitOptions opt;
    opt.restarts = 1;
    opt.tol = 0;
    opt.max_iters = 60;
    const GmmFit fit = fit_gmm(data, k, rng, opt);
    ASSERT_GE(fit.log_likelihood_trace.size(), 2u);
    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
      EXPECT_GE(fit.log_likelihood_trace[i], fit.log_likelihood_trace[i - 1] - 1e-9) << "K=" << k << " it=" << i;
    }
  }
}

TEST(GmmFit, DegenerateDataIsFloored) {
  MatrixXd data = MatrixXd::Zero(20, 2);
  for (int i = 0; i < 20; ++i) data(i, 0) = i;
  numerics::Rng rng(2);
  const GmmFit fit = fit_gmm(data, 1, rng);
  EXPECT_GT(fit.floored_events, 0);
  EXPECT_NEAR(fit.model.covariances()[0](1, 1), 1e-6, 1e-12);
}

TEST(GmmFit, TooFewPointsFails) {
  numerics::Rng rng(1);
  EXPECT_THROW(fit_gmm(MatrixXd::Zero(2, 1), 3, rng), UsageError);
}

TEST(Categorical, SmoothedCounts) {
  MatrixXi data(4, 1);
  data << 0, 0, 0, 1;
  const auto m = fit_categorical(data, {2}, {}, 1.0);
  EXPECT_NEAR(std::exp(m.log_density(std::vector<int>{0})), 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(std::exp(m.log_density(std::vector<int>{1})), 2.0 / 6.0, 1e-15);
}

TEST(Categorical, UnseenPrefixIsUniform) {
  MatrixXi data(2, 2);
  data << 0, 1, 0, 2;
  const auto m = fit_categorical(data, {2, 3});
  const auto p = m.conditional(1, std::vector<int>{1, 0});
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

MatrixXi random_codes(const std::vector<int>& cards, int n, numerics::Rng& rng) {
  MatrixXi data(n, static_cast<Eigen::Index>(cards.size()));
  for (int i = 0; i < n; ++i) {
    // Correlated columns so that prefixes matter.
    int prev = 0;
    for (std::size_t j = 0; j < cards.size(); ++j) {
      const int v = rng.bernoulli(0.6) ? prev % cards[j] : static_cast<int>(rng.index(static_cast<std::size_t>(cards[j])));
      data(i, static_cast<Eigen::Index>(j)) = v;
      prev = v;
    }
  }
  return data;
}

double total_mass(const AutoregressiveCategorical& m) {
  std::vector<int> x(m.cardinalities().size(), 0);
  double total = 0;
  while (true) {
    total += std::exp(m.log_density(x));
    std::size_t j = 0;
    while (j < x.size() && ++x[j] == m.cardinalities()[j]) x[j++] = 0;
    if (j == x.size()) break;
  }
  return total;
}

TEST(Categorical, NormalizesOverDomain) {
  numerics::Rng rng(4);
  const std::vector<int> cards{3, 2, 4};
  const MatrixXi data = random_codes(cards, 200, rng);
  EXPECT_NEAR(total_mass(fit_categorical(data, cards, {}, 1.0)), 1.0, 1e-12);
  EXPECT_NEAR(total_mass(fit_categorical(data, cards, {2, 0, 1}, 0.3)), 1.0, 1e-12);

  const std::vector<int> big{5, 6, 5, 4, 5, 4};
  const MatrixXi wide = random_codes(big, 3000, rng);
  EXPECT_NEAR(total_mass(fit_categorical(wide, big, {}, 0.5)), 1.0, 1e-9);
}

TEST(Categorical, VanishingAlphaGivesEmpiricalFrequencies) {
  numerics::Rng rng(6);
  const std::vector<int> cards{2, 3};
  const MatrixXi data = random_codes(cards, 500, rng);
  const auto m = fit_categorical(data, cards, {}, 1e-12);
  std::map<std::pair<int, int>, double> freq;
  for (Eigen::Index i = 0; i < data.rows(); ++i) freq[{data(i, 0), data(i, 1)}] += 1.0 / 500;
  for (const auto& [key, f] : freq) {
    EXPECT_NEAR(std::exp(m.log_density(std::vector<int>{key.first, key.second})), f, 1e-9);
  }
}

TEST(Categorical, SampleFrequenciesMatch) {
  numerics::Rng rng(12);
  const std::vector<int> cards{3, 2};
  const auto m = fit_categorical(random_codes(cards, 300, rng), cards);
  std::map<std::pair<int, int>, double> freq;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = m.sample(rng);
    freq[{s[0], s[1]}] += 1.0 / n;
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double observed = freq[{a, b}];
      EXPECT_NEAR(observed, std::exp(m.log_density(std::vector<int>{a, b})), 0.01);
    }
  }
}

TEST(Categorical, RejectsBadInput) {
  EXPECT_THROW(AutoregressiveCategorical({2}, {}, 0.0), UsageError);
  EXPECT_THROW(AutoregressiveCategorical({2, 2}, {0, 0}, 1.0), UsageError);
  const AutoregressiveCategorical m({2}, {}, 1.0);
  EXPECT_THROW(m.log_density(std::vector<int>{2}), UsageError);
}

TEST(DensityModel, DispatchesOnKind) {
  const DensityModel g(two_cluster_truth(), DensityMetadata{});
  EXPECT_TRUE(g.is_gmm());
  EXPECT_EQ(g.dim(), 2);
  EXPECT_THROW(g.categorical(), UsageError);
  MatrixXi data(2, 1);
  data << 1, 1;
  const DensityModel c(fit_categorical(data, {3}), DensityMetadata{0, 2});
  EXPECT_NEAR(c.log_density(VectorXd(VectorXd::Constant(1, 1.0))), std::log(3.0 / 5.0), 1e-15);
  EXPECT_THROW(c.log_density(VectorXd(VectorXd::Constant(1, 0.5))), UsageError);
  numerics::Rng rng(1);
  const MatrixXd s = c.sample(10, rng);
  EXPECT_EQ(s.rows(), 10);
}

}  // namespace
}  // namespace fnf::density
