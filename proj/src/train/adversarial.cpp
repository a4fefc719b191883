#include "fnf/train/adversarial.hpp"

#include <cmath>
#include <limits>

#include "fnf/certify/attack.hpp"
#include "fnf/errors.hpp"
#include "fnf/numerics/optim.hpp"

namespace fnf::train {

void AdversarialConfig::validate() const {
  if (!(gamma >= 0)) throw UsageError("adversarial gamma must be non-negative");
  if (epochs < 1 || batch_size < 1 || adversary_steps < 1 || refit_epochs < 1) {
    throw UsageError("epochs, batch size and step counts must be positive");
  }
  if (!(lr > 0)) throw UsageError("learning rate must be positive");
}

namespace {

Eigen::MatrixXd with_group(const Eigen::MatrixXd& x, const Eigen::VectorXi& a) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()) = a.cast<double>();
  return out;
}

}  // namespace

Eigen::MatrixXd AdversarialResult::encode(const Eigen::MatrixXd& x, const Eigen::VectorXi& a) const {
  return encoder.apply(with_group(x, a), encoder_params);
}

AdversarialResult train_adversarial_baseline(const AdversarialConfig& config, const data::TabularDataset& train,
                                             const data::TabularDataset& test) {
  config.validate();
  train.validate();
  test.validate();
  if (train.rows() == 0 || test.rows() == 0) throw UsageError("adversarial baseline needs train and test rows");
  const int d = train.features();
  if (test.features() != d) throw UsageError("train and test differ in width");

  numerics::Rng root(config.seed);
  numerics::Rng init = root.split("adversarial.init");
  numerics::Rng batches = root.split("adversarial.batches");

  AdversarialResult r;
  r.encoder = numerics::Mlp(d + 1, config.encoder_hidden, d, numerics::Activation::kTanh);
  numerics::ParamLayout layout;
  r.encoder.declare(layout, "enc");
  r.encoder_params = numerics::ParamVector(layout);
  r.encoder.initialize(r.encoder_params, init);
  r.classifier = downstream::Classifier(d, config.classifier_hidden);
  r.classifier.initialize(init);
  r.adversary = downstream::Classifier(d, config.adversary_hidden);
  r.adversary.initialize(init);

  const Eigen::MatrixXd xa = with_group(train.x, train.a);
  const Eigen::VectorXd a = train.a.cast<double>();
  auto state_f = numerics::AdamState::zeros(static_cast<Eigen::Index>(r.encoder_params.size()));
  auto state_h = numerics::AdamState::zeros(static_cast<Eigen::Index>(r.classifier.params().size()));
  auto state_g = numerics::AdamState::zeros(static_cast<Eigen::Index>(r.adversary.params().size()));
  const numerics::AdamConfig adam{.lr = config.lr};
  const int b = config.batch_size;
  const int steps = static_cast<int>((train.rows() + b - 1) / b);

  auto draw = [&](Eigen::MatrixXd& xb, Eigen::VectorXd& yb, Eigen::VectorXd& ab) {
    xb.resize(b, d + 1);
    yb.resize(b);
    ab.resize(b);
    for (int i = 0; i < b; ++i) {
      const auto row = static_cast<Eigen::Index>(batches.index(static_cast<std::size_t>(train.rows())));
      xb.row(i) = xa.row(row);
      yb[i] = train.y[row];
      ab[i] = a[row];
    }
  };

  try {
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      double clf_sum = 0, adv_sum = 0;
      for (int step = 0; step < steps; ++step) {
        Eigen::MatrixXd xb;
        Eigen::VectorXd yb, ab;
        for (int k = 0; k < config.adversary_steps; ++k) {
          draw(xb, yb, ab);
          const Eigen::MatrixXd z = r.encoder.apply(xb, r.encoder_params);
          ad::Tape tape;
          const auto lg = numerics::bind_parameters(tape, r.adversary.params());
          const ad::Var loss = ad::bce_with_logits(r.adversary.logits(tape.constant(z), lg), ab);
          tape.backward(loss);
          const Eigen::VectorXd g = numerics::gather_gradient(tape, lg, r.adversary.params());
          if (!std::isfinite(ad::scalar(loss)) || !g.allFinite()) throw NumericError("adversary loss diverged");
          numerics::adam_update(r.adversary.params(), g, state_g, adam);
          adv_sum += ad::scalar(loss) / (steps * config.adversary_steps);
        }
        draw(xb, yb, ab);
        ad::Tape tape;
        const auto lf = numerics::bind_parameters(tape, r.encoder_params);
        const auto lh = numerics::bind_parameters(tape, r.classifier.params());
        const auto lg = numerics::bind_parameters(tape, r.adversary.params());
        const ad::Var z = r.encoder.apply(tape.constant(xb), lf);
        const ad::Var lclf = ad::bce_with_logits(r.classifier.logits(z, lh), yb);
        const ad::Var ladv = ad::bce_with_logits(r.adversary.logits(z, lg), ab);
        const ad::Var loss = lclf - ladv * config.gamma;
        tape.backward(loss);
        const Eigen::VectorXd gf = numerics::gather_gradient(tape, lf, r.encoder_params);
        const Eigen::VectorXd gh = numerics::gather_gradient(tape, lh, r.classifier.params());
        if (!std::isfinite(ad::scalar(loss)) || !gf.allFinite() || !gh.allFinite()) {
          throw NumericError("encoder/classifier loss diverged");
        }
        numerics::adam_update(r.encoder_params, gf, state_f, adam);
        numerics::adam_update(r.classifier.params(), gh, state_h, adam);
        clf_sum += ad::scalar(lclf) / steps;
      }
      r.clf_loss.push_back(clf_sum);
      r.adv_loss.push_back(adv_sum);
    }

    const Eigen::MatrixXd z_train = r.encode(train.x, train.a);
    const Eigen::MatrixXd z_test = r.encode(test.x, test.a);
    if (!z_train.allFinite() || !z_test.allFinite()) throw NumericError("encoder produced non-finite latents");
    r.task_accuracy = downstream::accuracy(r.classifier.predict(z_test), test.y);
    r.joint_adversary_accuracy = downstream::balanced_accuracy(r.adversary.predict(z_test), test.a.cast<double>());
    certify::AttackOptions refit;
    refit.seeds = {config.seed};
    refit.fit.epochs = config.refit_epochs;
    const certify::AttackResult attack = certify::attack_mlp(z_train, train.a, z_test, test.a, config.refit_hidden, refit);
    if (!attack.failures.empty()) throw NumericError("refit adversary diverged: " + attack.failures.front());
    r.recovery_rate = attack.max_accuracy;
  } catch (const NumericError& e) {
    r.diverged = true;
    r.failure = e.what();
    r.joint_adversary_accuracy = r.recovery_rate = r.task_accuracy = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace fnf::train
