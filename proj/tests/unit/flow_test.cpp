#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fnf/errors.hpp"
#include "fnf/flow/encoder.hpp"
#include "fnf/numerics/optim.hpp"

namespace fnf::flow {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

FlowEncoder random_flow(int dim, int blocks, std::uint64_t seed, double spread = 0.4) {
  FlowConfig cfg;
  cfg.dim = dim;
  cfg.blocks = blocks;
  cfg.hidden = {8, 8};
  FlowEncoder f(cfg, 0);
  numerics::Rng rng(seed);
  f.initialize(rng);
  for (double& p : f.params().values()) p += spread * rng.normal();
  return f;
}

MatrixXd random_points(int n, int d, std::uint64_t seed) {
  numerics::Rng rng(seed);
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 1.5 * rng.normal();
  return x;
}

void set_bias(FlowEncoder& f, const std::string& name, double value) {
  const auto idx = f.params().segment_index(name);
  f.params().matrix(idx).setConstant(value);
}

TEST(Flow, IdentityAtInitialization) {
  FlowConfig cfg;
  cfg.dim = 5;
  numerics::Rng rng(1);
  FlowEncoder f(cfg, 1);
  f.initialize(rng);
  const MatrixXd x = random_points(20, 5, 2);
  const FlowOutput fw = f.forward(x);
  EXPECT_EQ(fw.value, x);
  EXPECT_EQ(fw.log_det, VectorXd::Zero(20));
  const FlowOutput inv = f.inverse(x);
  EXPECT_EQ(inv.value, x);
}

TEST(Flow, MasksAlternateAndSplitOddDimensions) {
  const CouplingLayer even(5, 0, {4}, numerics::Activation::kTanh, 5.0);
  const CouplingLayer odd(5, 1, {4}, numerics::Activation::kTanh, 5.0);
  EXPECT_EQ(even.active(), (std::vector<int>{0, 2, 4}));
  EXPECT_EQ(even.passive(), (std::vector<int>{1, 3}));
  EXPECT_EQ(odd.active(), (std::vector<int>{1, 3}));
}

TEST(Flow, ConstantScaleGivesAffineLogDet) {
  FlowConfig cfg;
  cfg.dim = 4;
  cfg.blocks = 1;
  cfg.hidden = {6};
  FlowEncoder f(cfg, 0);
  numerics::Rng rng(3);
  f.initialize(rng);
  const double c = 0.7;
  // Last scale layer of the first coupling has zero weights; its bias sets
  // the raw scale, which the clamp maps to c.
  set_bias(f, "layer0.s.b1", cfg.scale_clamp * std::atanh(c / cfg.scale_clamp));
  const MatrixXd x = random_points(10, 4, 4);
  const FlowOutput out = f.forward(x);
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_NEAR(out.log_det[i], 2 * c, 1e-12);
  EXPECT_NEAR(out.value(0, 0), x(0, 0) * std::exp(c), 1e-12);
  EXPECT_EQ(out.value(0, 1), x(0, 1));
}

TEST(Flow, ScaleIsClamped) {
  FlowConfig cfg;
  cfg.dim = 2;
  cfg.blocks = 1;
  FlowEncoder f(cfg, 0);
  numerics::Rng rng(3);
  f.initialize(rng);
  set_bias(f, "layer0.s.b2", 1e6);
  const FlowOutput out = f.forward(MatrixXd::Ones(1, 2));
  EXPECT_NEAR(out.log_det[0], cfg.scale_clamp, 1e-12);
}

double numerical_log_abs_det(const FlowEncoder& f, const VectorXd& x) {
  const int d = static_cast<int>(x.size());
  MatrixXd jac(d, d);
  const double h = 1e-5;
  for (int j = 0; j < d; ++j) {
    MatrixXd xp = x.transpose(), xm = x.transpose();
    xp(0, j) += h;
    xm(0, j) -= h;
    jac.col(j) = ((f.forward(xp).value - f.forward(xm).value) / (2 * h)).transpose();
  }
  return std::log(std::abs(jac.determinant()));
}

TEST(Flow, LogDetMatchesNumericalJacobian) {
  for (int d : {2, 3, 5, 6}) {
    const FlowEncoder f = random_flow(d, 4, 10 + static_cast<std::uint64_t>(d));
    const MatrixXd x = random_points(100, d, 20 + static_cast<std::uint64_t>(d));
    const FlowOutput out = f.forward(x);
    double worst = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double numeric = numerical_log_abs_det(f, x.row(i).transpose());
      worst = std::max(worst, std::abs(numeric - out.log_det[i]) / std::max(1.0, std::abs(out.log_det[i])));
    }
    EXPECT_LT(worst, 1e-4) << "d=" << d;
  }
}

TEST(Flow, RoundTripAndLogDetCancel) {
  for (int d : {1, 2, 7}) {
    const FlowEncoder f = random_flow(d, 4, 40 + static_cast<std::uint64_t>(d));
    const MatrixXd x = random_points(1000, d, 50);
    const FlowOutput fw = f.forward(x);
    const FlowOutput inv = f.inverse(fw.value);
    EXPECT_LT((inv.value - x).cwiseAbs().maxCoeff(), 1e-6) << "d=" << d;
    EXPECT_LT((fw.log_det + inv.log_det).cwiseAbs().maxCoeff(), 1e-8) << "d=" << d;
  }
}

TEST(Flow, TapePathMatchesPlainPath) {
  const FlowEncoder f = random_flow(3, 2, 60);
  const MatrixXd x = random_points(7, 3, 61);
  ad::Tape tape;
  const auto leaves = numerics::bind_parameters(tape, f.params());
  const auto xv = tape.constant(x);
  const TapeFlowOutput fw = f.forward(xv, leaves);
  const TapeFlowOutput inv = f.inverse(xv, leaves);
  EXPECT_LT((fw.value.value() - f.forward(x).value).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((fw.log_det.value().col(0) - f.forward(x).log_det).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((inv.value.value() - f.inverse(x).value).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Flow, NonFiniteInputFails) {
  const FlowEncoder f = random_flow(2, 1, 1);
  MatrixXd x = MatrixXd::Zero(1, 2);
  x(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(f.forward(x), NumericError);
  EXPECT_THROW(f.forward(MatrixXd::Zero(1, 3)), UsageError);
}

density::DensityModel standard_normal(int d) {
  return density::DensityModel(
      density::GaussianMixture(VectorXd::Ones(1), MatrixXd::Zero(1, d), {MatrixXd::Identity(d, d)}), {});
}

TEST(LatentDensity, IdentityFlowKeepsDensity) {
  FlowConfig cfg;
  cfg.dim = 2;
  FlowEncoder f(cfg, 0);
  numerics::Rng rng(2);
  f.initialize(rng);
  const auto base = standard_normal(2);
  const MatrixXd z = random_points(10, 2, 3);
  EXPECT_LT((latent_log_density(f, base, z) - base.log_density_batch(z)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LatentDensity, AffineOneDimensional) {
  FlowConfig cfg;
  cfg.dim = 1;
  cfg.blocks = 1;
  FlowEncoder f(cfg, 0);
  numerics::Rng rng(2);
  f.initialize(rng);
  set_bias(f, "layer0.s.b2", cfg.scale_clamp * std::atanh(std::log(2.0) / cfg.scale_clamp));
  set_bias(f, "layer0.t.b2", 1.0);
  const auto base = standard_normal(1);
  for (double z : {-3.0, -0.5, 1.0, 2.5}) {
    const MatrixXd zm = MatrixXd::Constant(1, 1, z);
    const double u = (z - 1) / 2;
    const double expected = -0.5 * u * u - 0.5 * std::log(2 * std::numbers::pi) - std::log(2.0);
    EXPECT_NEAR(latent_log_density(f, base, zm)[0], expected, 1e-12);
    EXPECT_NEAR(f.forward(MatrixXd::Constant(1, 1, u)).value(0, 0), z, 1e-12);
  }
}

TEST(LatentDensity, NormalizesOneDimensional) {
  const FlowEncoder f = random_flow(1, 4, 77, 0.3);
  VectorXd w(2);
  w << 0.3, 0.7;
  MatrixXd mu(2, 1);
  mu << -1, 1.5;
  const density::DensityModel base(
      density::GaussianMixture(w, mu, {MatrixXd::Constant(1, 1, 0.4), MatrixXd::Constant(1, 1, 1.0)}), {});
  const int n = 40001;
  const double lo = -60, hi = 60, h = (hi - lo) / (n - 1);
  MatrixXd grid(n, 1);
  for (int i = 0; i < n; ++i) grid(i, 0) = lo + i * h;
  const VectorXd p = latent_log_density(f, base, grid).array().exp();
  const double integral = h * (p.sum() - 0.5 * (p[0] + p[n - 1]));
  EXPECT_NEAR(integral, 1.0, 1e-3);
}

TEST(LatentDensity, NormalizesTwoDimensional) {
  const FlowEncoder f = random_flow(2, 2, 78, 0.2);
  const auto base = standard_normal(2);
  const int n = 601;
  const double lo = -15, hi = 15, h = (hi - lo) / (n - 1);
  MatrixXd grid(n * n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) grid.row(i * n + j) << lo + i * h, lo + j * h;
  }
  const VectorXd p = latent_log_density(f, base, grid).array().exp();
  double integral = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      integral += wi * wj * p[i * n + j];
    }
  }
  EXPECT_NEAR(integral * h * h, 1.0, 1e-3);
}

TEST(LatentDensity, ParameterGradientPassesGradCheck) {
  FlowEncoder f = random_flow(3, 2, 90, 0.3);
  VectorXd w(2);
  w << 0.5, 0.5;
  MatrixXd mu(2, 3);
  mu << -1, 0, 1, 1, 1, -1;
  const density::GaussianMixture base(w, mu, {MatrixXd::Identity(3, 3), 0.5 * MatrixXd::Identity(3, 3)});
  const MatrixXd z = random_points(16, 3, 91);
  auto loss = [&](const VectorXd& p) {
    f.params().assign(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    ad::Tape tape;
    const auto leaves = numerics::bind_parameters(tape, f.params());
    const ad::Var out = ad::mean(latent_log_density(f, leaves, base, tape.constant(z)));
    tape.backward(out);
    return numerics::GradResult{out.value()(0, 0), numerics::gather_gradient(tape, leaves, f.params())};
  };
  const VectorXd start = f.params().as_vector();
  EXPECT_LT(numerics::grad_check(loss, start), 1e-4);
}

TEST(Standardizer, RoundTripAndMoments) {
  MatrixXd x = random_points(200, 3, 5);
  x.col(1).array() = x.col(1).array() * 10 + 4;
  x.col(2).setConstant(2.0);
  const Standardizer s = Standardizer::fit(x);
  const MatrixXd y = s.apply(x);
  EXPECT_LT(y.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR((y.col(1).array().square().mean()), 1.0, 1e-12);
  EXPECT_EQ(s.scale[2], 1.0);
  EXPECT_LT((s.invert(y) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FlowPair, IndependentParameters) {
  FlowConfig cfg;
  cfg.dim = 3;
  numerics::Rng rng(4);
  FlowEncoderPair pair(cfg, rng);
  EXPECT_EQ(pair.encoder(0).group(), 0);
  EXPECT_EQ(pair.encoder(1).group(), 1);
  EXPECT_NE(pair.f0.params().as_vector(), pair.f1.params().as_vector());
  EXPECT_THROW(pair.encoder(2), UsageError);
}

}  // namespace
}  // namespace fnf::flow
