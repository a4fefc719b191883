#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fnf/errors.hpp"
#include "fnf/numerics/autodiff.hpp"
#include "fnf/numerics/mlp.hpp"
#include "fnf/numerics/optim.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::numerics {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(GradCheck, SquareIsExact) {
  auto f = [](const VectorXd& x) { return GradResult{x[0] * x[0], VectorXd::Constant(1, 2 * x[0])}; };
  EXPECT_LT(grad_check(f, VectorXd::Constant(1, 3.0), 1e-5), 1e-8);
}

TEST(GradCheck, StandardNormalLogDensity) {
  auto f = [](const VectorXd& x) {
    return GradResult{-0.5 * x[0] * x[0] - 0.5 * std::log(2 * std::numbers::pi), VectorXd::Constant(1, -x[0])};
  };
  const auto r = f(VectorXd::Constant(1, 1.0));
  EXPECT_DOUBLE_EQ(r.gradient[0], -1.0);
  EXPECT_LT(grad_check(f, VectorXd::Constant(1, 1.0)), 1e-6);
}

TEST(GradCheck, DetectsWrongGradient) {
  auto f = [](const VectorXd& x) { return GradResult{x[0] * x[0], VectorXd::Constant(1, 3 * x[0])}; };
  EXPECT_GT(grad_check(f, VectorXd::Constant(1, 2.0)), 0.1);
}

TEST(GradCheck, NonFiniteLossFails) {
  auto f = [](const VectorXd& x) { return GradResult{std::log(x[0]), VectorXd::Constant(1, 1 / x[0])}; };
  EXPECT_THROW(grad_check(f, VectorXd::Constant(1, 0.0)), NumericError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamConfig cfg;
  cfg.lr = 0.1;
  for (double g : {-5.0, 0.003, 42.0}) {
    const auto r = adam_step(VectorXd::Constant(1, 1.0), VectorXd::Constant(1, g), AdamState::zeros(1), cfg);
    EXPECT_NEAR(r.params[0] - 1.0, -cfg.lr * (g > 0 ? 1 : -1), 1e-6);
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  const VectorXd p = VectorXd::LinSpaced(4, -1, 1);
  const auto r = adam_step(p, VectorXd::Zero(4), AdamState::zeros(4), AdamConfig{});
  EXPECT_EQ(r.params, p);
}

TEST(Adam, ConvergesOnQuadratic) {
  AdamConfig cfg;
  cfg.lr = 0.1;
  VectorXd x = VectorXd::Zero(1);
  AdamState s = AdamState::zeros(1);
  for (int i = 0; i < 100; ++i) {
    auto r = adam_step(x, VectorXd::Constant(1, 2 * (x[0] - 2)), s, cfg);
    x = r.params;
    s = r.state;
  }
  EXPECT_LT(std::abs(x[0] - 2.0), 0.05);
}

TEST(Adam, PureAndShapeChecked) {
  const VectorXd p = VectorXd::LinSpaced(3, 0.1, 0.3);
  const VectorXd g = VectorXd::LinSpaced(3, -1, 2);
  AdamState s = AdamState::zeros(3);
  s.m = VectorXd::Constant(3, 0.2);
  s.v = VectorXd::Constant(3, 0.3);
  s.step = 7;
  const auto a = adam_step(p, g, s, AdamConfig{});
  const auto b = adam_step(p, g, s, AdamConfig{});
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.state.m, b.state.m);
  EXPECT_EQ(a.state.v, b.state.v);
  EXPECT_THROW(adam_step(p, VectorXd::Zero(2), s, AdamConfig{}), UsageError);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(17), b(17), c(18);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    (void)c;
  }
  EXPECT_NE(Rng(17).uniform(), Rng(18).uniform());
}

TEST(Rng, SplitIsIndependentOfConsumption) {
  Rng a(5);
  const Rng fresh = a.split("init");
  for (int i = 0; i < 10; ++i) a.uniform();
  Rng later = a.split("init");
  Rng f2 = fresh;
  EXPECT_EQ(f2.next_u64(), later.next_u64());
  EXPECT_NE(Rng(5).split("init").next_u64(), Rng(5).split("batch").next_u64());
}

TEST(Rng, MomentsLookRight) {
  Rng r(1);
  double s = 0, s2 = 0, u = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
    u += r.uniform();
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(u / n, 0.5, 0.005);
}

// Each tape primitive against central differences through a random scalar
// contraction of its output.
class TapeOps : public ::testing::Test {
 protected:
  using Op = std::function<ad::Var(const ad::Var&, const ad::Var&)>;

  double check(const Op& op, Eigen::Index r, Eigen::Index c, Eigen::Index r2, Eigen::Index c2,
               std::uint64_t seed = 3) {
    Rng rng(seed);
    MatrixXd a(r, c), b(r2, c2);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal() * 0.7;
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal() * 0.7;
    MatrixXd weights;
    auto eval = [&](const VectorXd& flat, bool grad, VectorXd* g) {
      ad::Tape t;
      ad::Var va = t.leaf(Eigen::Map<const MatrixXd>(flat.data(), r, c));
      ad::Var vb = t.leaf(Eigen::Map<const MatrixXd>(flat.data() + r * c, r2, c2));
      ad::Var out = op(va, vb);
      if (weights.size() == 0) {
        Rng wr(99);
        weights.resize(out.rows(), out.cols());
        for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = wr.normal();
      }
      ad::Var loss = ad::sum(ad::hadamard(out, t.constant(weights)));
      if (grad) {
        t.backward(loss);
        g->resize(flat.size());
        MatrixXd ga = t.grad(va), gb = t.grad(vb);
        g->head(r * c) = Eigen::Map<VectorXd>(ga.data(), ga.size());
        g->tail(r2 * c2) = Eigen::Map<VectorXd>(gb.data(), gb.size());
      }
      return ad::scalar(loss);
    };
    VectorXd flat(a.size() + b.size());
    flat << Eigen::Map<VectorXd>(a.data(), a.size()), Eigen::Map<VectorXd>(b.data(), b.size());
    return grad_check(
        [&](const VectorXd& p) {
          GradResult res;
          res.loss = eval(p, true, &res.gradient);
          return res;
        },
        flat);
  }
};

TEST_F(TapeOps, Matmul) { EXPECT_LT(check([](auto& a, auto& b) { return ad::matmul(a, b); }, 4, 3, 3, 2), 1e-7); }
TEST_F(TapeOps, AddSubHadamard) {
  EXPECT_LT(check([](auto& a, auto& b) { return ad::hadamard(a + b, a - b * 2.0); }, 3, 3, 3, 3), 1e-7);
}
TEST_F(TapeOps, AddRowTanhExp) {
  EXPECT_LT(check([](auto& a, auto& b) { return ad::exp(ad::tanh(ad::add_row(a, b))); }, 5, 2, 1, 2), 1e-7);
}
TEST_F(TapeOps, SigmoidLogRelu) {
  EXPECT_LT(check([](auto& a, auto& b) { return ad::log(ad::add_scalar(ad::sigmoid(a), 0.5)) + ad::relu(b); }, 3, 2,
                  3, 2, 11),
            1e-6);
}
TEST_F(TapeOps, SelectMergeConcat) {
  const std::vector<int> even{0, 2}, odd{1};
  EXPECT_LT(check(
                [&](auto& a, auto& b) {
                  auto sel = ad::select_cols(a, even);
                  return ad::concat_rows(ad::merge_cols(sel, even, b, odd, 3), a);
                },
                4, 3, 4, 1),
            1e-7);
}
TEST_F(TapeOps, ReductionsAndMax) {
  EXPECT_LT(check([](auto& a, auto& b) { return ad::max_scalar(ad::mean(ad::row_sum(a)), ad::sum(b)); }, 3, 4, 2, 2),
            1e-7);
}
TEST_F(TapeOps, BinaryCrossEntropy) {
  VectorXd labels(6);
  labels << 0, 1, 1, 0, 1, 0;
  EXPECT_LT(check([&](auto& a, auto& b) { return ad::bce_with_logits(a + b, labels); }, 6, 1, 6, 1), 1e-7);
  VectorXd weights(6);
  weights << 0.5, 2, 1, 1, 0.25, 3;
  EXPECT_LT(check([&](auto& a, auto& b) { return ad::bce_with_logits(a + b, labels, weights); }, 6, 1, 6, 1), 1e-7);
}

TEST(TapeOps2, ShapeErrors) {
  ad::Tape t;
  auto a = t.leaf(MatrixXd::Zero(2, 3));
  auto b = t.leaf(MatrixXd::Zero(2, 2));
  EXPECT_THROW(a + b, UsageError);
  EXPECT_THROW(ad::matmul(a, b), UsageError);
  EXPECT_THROW(t.backward(a), UsageError);
}

TEST(Mlp, TapeMatchesPlainEvaluation) {
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    Mlp net(3, {8, 5}, 2, act);
    ParamLayout layout;
    net.declare(layout, "net");
    ParamVector p(layout);
    Rng rng(4);
    net.initialize(p, rng);
    MatrixXd x(7, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    ad::Tape t;
    auto leaves = bind_parameters(t, p);
    const MatrixXd via_tape = net.apply(t.constant(x), leaves).value();
    EXPECT_LT((via_tape - net.apply(x, p)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Mlp, GradCheckAcrossSeeds) {
  Mlp net(2, {6, 6}, 1, Activation::kTanh);
  ParamLayout layout;
  net.declare(layout, "h");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamVector p(layout);
    Rng rng(seed);
    net.initialize(p, rng);
    MatrixXd x(9, 2);
    VectorXd y(9);
    for (Eigen::Index i = 0; i < 9; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      y[i] = rng.bernoulli(0.5);
    }
    auto loss = [&](const VectorXd& flat) {
      ParamVector q = p;
      q.assign(std::span<const double>(flat.data(), flat.size()));
      ad::Tape t;
      auto leaves = bind_parameters(t, q);
      auto l = ad::bce_with_logits(net.apply(t.constant(x), leaves), y);
      t.backward(l);
      return GradResult{ad::scalar(l), gather_gradient(t, leaves, q)};
    };
    EXPECT_LT(grad_check(loss, p.as_vector()), 1e-4) << "seed " << seed;
  }
}

TEST(Mlp, ZeroOutputInitAndArchitectureParsing) {
  Mlp net(2, {4}, 3, Activation::kTanh);
  ParamLayout layout;
  net.declare(layout, "n");
  ParamVector p(layout);
  Rng rng(1);
  net.initialize(p, rng, 0.0);
  EXPECT_EQ(net.apply(MatrixXd::Ones(2, 2), p), MatrixXd::Zero(2, 3));
  EXPECT_EQ(parse_architecture("2x50"), (std::vector<int>{50, 50}));
  EXPECT_EQ(parse_architecture("3x200").size(), 3u);
  EXPECT_TRUE(parse_architecture("0").empty());
  EXPECT_THROW(parse_architecture("fifty"), UsageError);
  EXPECT_EQ(format_architecture({50, 50}), "2x50");
}

TEST(ParamVector, SegmentsAndFixedLength) {
  ParamLayout layout;
  layout.add("a", 2, 3);
  layout.add("b", 1, 4);
  ParamVector p(layout);
  EXPECT_EQ(p.size(), 10u);
  p.matrix(1)(0, 2) = 5.0;
  EXPECT_EQ(p.values()[6 + 2], 5.0);
  EXPECT_EQ(p.segment_index("b"), 1u);
  std::vector<double> wrong(3);
  EXPECT_THROW(p.assign(wrong), UsageError);
  EXPECT_TRUE(p.all_finite());
}

}  // namespace
}  // namespace fnf::numerics
