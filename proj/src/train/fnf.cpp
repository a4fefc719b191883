#include "fnf/train/fnf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fnf/certify/certify.hpp"
#include "fnf/numerics/optim.hpp"

namespace fnf::train {

const char* to_string(Scalarization s) { return s == Scalarization::kConvex ? "convex" : "chebyshev"; }

Scalarization scalarization_from_string(const std::string& s) {
  if (s == "convex") return Scalarization::kConvex;
  if (s == "chebyshev") return Scalarization::kChebyshev;
  throw UsageError("unknown scalarization '" + s + "' (expected convex or chebyshev)");
}

void TrainConfig::validate() const {
  if (!(gamma >= 0 && gamma <= 1)) throw UsageError("gamma must lie in [0, 1], got " + std::to_string(gamma));
  if (epochs < 1) throw UsageError("epochs must be at least 1");
  if (gamma_warmup_epochs < 0) throw UsageError("gamma warmup must be non-negative");
  if (batch_size < 1) throw UsageError("batch size must be at least 1");
  if (steps_per_epoch < 0) throw UsageError("steps per epoch must be non-negative");
  if (!(lr > 0)) throw UsageError("learning rate must be positive");
  if (weight_decay < 0) throw UsageError("weight decay must be non-negative");
  if (validation_samples < 1) throw UsageError("validation sample count must be positive");
  if (restarts < 1) throw UsageError("restarts must be at least 1");
}

namespace {

void check_rows(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(std::string("non-finite ") + what + " at sample " + std::to_string(i));
    }
  }
}

}  // namespace

KlTerms kl_surrogate_losses(const flow::FlowEncoderPair& pair, const density::GaussianMixture& p0,
                            const density::GaussianMixture& p1, const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x1) {
  const flow::FlowOutput z0 = pair.f0.forward(x0);
  const flow::FlowOutput z1 = pair.f1.forward(x1);
  const flow::FlowOutput back10 = pair.f1.inverse(z0.value);
  const flow::FlowOutput back01 = pair.f0.inverse(z1.value);
  const Eigen::VectorXd d0 = (p0.log_density_batch(x0) - z0.log_det) - (p1.log_density_batch(back10.value) + back10.log_det);
  const Eigen::VectorXd d1 = (p1.log_density_batch(x1) - z1.log_det) - (p0.log_density_batch(back01.value) + back01.log_det);
  check_rows(d0, "group-0 log-density ratio");
  check_rows(d1, "group-1 log-density ratio");
  return {d0.mean(), d1.mean()};
}

TapeKlTerms kl_surrogate_losses(ad::Tape& tape, const flow::FlowEncoderPair& pair, std::span<const ad::Var> leaves0,
                                std::span<const ad::Var> leaves1, const density::GaussianMixture& p0,
                                const density::GaussianMixture& p1, const Eigen::MatrixXd& x0,
                                const Eigen::MatrixXd& x1) {
  const flow::TapeFlowOutput z0 = pair.f0.forward(tape.constant(x0), leaves0);
  const flow::TapeFlowOutput z1 = pair.f1.forward(tape.constant(x1), leaves1);
  // log p_{Z_a}(f_a(x)) = log p_a(x) - log|det J_{f_a}(x)|
  const ad::Var own0 = tape.constant(p0.log_density_batch(x0)) - z0.log_det;
  const ad::Var own1 = tape.constant(p1.log_density_batch(x1)) - z1.log_det;
  const ad::Var cross0 = flow::latent_log_density(pair.f1, leaves1, p1, z0.value);
  const ad::Var cross1 = flow::latent_log_density(pair.f0, leaves0, p0, z1.value);
  const ad::Var d0 = own0 - cross0;
  const ad::Var d1 = own1 - cross1;
  check_rows(d0.value().col(0), "group-0 log-density ratio");
  check_rows(d1.value().col(0), "group-1 log-density ratio");
  return {ad::mean(d0), ad::mean(d1)};
}

void LossNormalizer::update(double fairness, double classification) {
  const double f = std::max(std::abs(fairness), 1e-8);
  const double c = std::max(std::abs(classification), 1e-8);
  if (!seeded_) {
    fairness_ = f;
    classification_ = c;
    seeded_ = true;
    return;
  }
  fairness_ = momentum_ * fairness_ + (1 - momentum_) * f;
  classification_ = momentum_ * classification_ + (1 - momentum_) * c;
}

double joint_loss(double l0, double l1, double clf, double gamma, Scalarization mode,
                  const LossNormalizer* normalizer) {
  if (mode == Scalarization::kConvex) return gamma * (l0 + l1) + (1 - gamma) * clf;
  const double fs = normalizer ? normalizer->fairness_scale() : 1.0;
  const double cs = normalizer ? normalizer->classification_scale() : 1.0;
  return std::max(gamma * (l0 + l1) / fs, (1 - gamma) * clf / cs);
}

ad::Var joint_loss(const ad::Var& l0, const ad::Var& l1, const ad::Var& clf, double gamma, Scalarization mode,
                   const LossNormalizer* normalizer) {
  if (mode == Scalarization::kConvex) return (l0 + l1) * gamma + clf * (1 - gamma);
  const double fs = normalizer ? normalizer->fairness_scale() : 1.0;
  const double cs = normalizer ? normalizer->classification_scale() : 1.0;
  return ad::max_scalar((l0 + l1) * (gamma / fs), clf * ((1 - gamma) / cs));
}

Eigen::MatrixXd encode(const flow::FlowEncoderPair& pair, const Eigen::MatrixXd& x, const Eigen::VectorXi& a) {
  if (a.size() != x.rows()) throw UsageError("group vector does not match the rows");
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (int g = 0; g < 2; ++g) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] == g) rows.push_back(i);
    }
    if (rows.empty()) continue;
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) xs.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
    const Eigen::MatrixXd zs = pair.encoder(g).forward(xs).value;
    for (std::size_t k = 0; k < rows.size(); ++k) z.row(rows[k]) = zs.row(static_cast<Eigen::Index>(k));
  }
  return z;
}

namespace {

struct GroupRows {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

GroupRows draw_rows(const data::TabularDataset& group, int b, numerics::Rng& rng) {
  GroupRows out{Eigen::MatrixXd(b, group.x.cols()), Eigen::VectorXd(b)};
  for (int i = 0; i < b; ++i) {
    const auto r = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(group.rows())));
    out.x.row(i) = group.x.row(r);
    out.y[i] = group.y[r];
  }
  return out;
}

double bce(const Eigen::VectorXd& logits, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd l = logits.array();
  return ((l.max(0.0) + (-l.abs()).exp().log1p()) - y.array() * l).mean();
}

FnfResult train_once(const TrainConfig& config, const density::GaussianMixture& p0, const density::GaussianMixture& p1,
                     const data::TabularDataset& g0, const data::TabularDataset& g1, const data::TabularDataset& val,
                     const numerics::Rng& root, double& best_val) {
  const int d = g0.features();
  numerics::Rng init = root.split("train.init");
  numerics::Rng batches = root.split("train.batches");
  numerics::Rng val_rng = root.split("train.validation");

  flow::FlowConfig fc = config.flow;
  fc.dim = d;
  flow::FlowEncoderPair pair(fc, init);
  downstream::Classifier clf(d, config.classifier_hidden);
  numerics::Rng clf_init = init.split("classifier");
  clf.initialize(clf_init);

  const density::DensityModel base0(p0, {}), base1(p1, {});
  const Eigen::MatrixXd v0 = p0.sample(config.validation_samples, val_rng);
  const Eigen::MatrixXd v1 = p1.sample(config.validation_samples, val_rng);

  const int steps = config.steps_per_epoch > 0
                        ? config.steps_per_epoch
                        : static_cast<int>((g0.rows() + g1.rows() + config.batch_size - 1) / config.batch_size);
  const int b = config.batch_size;
  auto state0 = numerics::AdamState::zeros(static_cast<Eigen::Index>(pair.f0.params().size()));
  auto state1 = numerics::AdamState::zeros(static_cast<Eigen::Index>(pair.f1.params().size()));
  auto state_h = numerics::AdamState::zeros(static_cast<Eigen::Index>(clf.params().size()));
  LossNormalizer normalizer;

  FnfResult result;
  best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double flow_lr = numerics::scheduled_lr(config.flow_lr.value_or(config.lr), epoch, config.epochs, config.cosine);
    const double clf_lr =
        numerics::scheduled_lr(config.classifier_lr.value_or(config.lr), epoch, config.epochs, config.cosine);
    numerics::AdamConfig flow_cfg{.lr = flow_lr, .weight_decay = config.weight_decay};
    numerics::AdamConfig clf_cfg{.lr = clf_lr, .weight_decay = config.weight_decay};
    EpochRecord rec;
    for (int step = 0; step < steps; ++step) {
      const double progress = config.gamma_warmup_epochs > 0
                                  ? static_cast<double>(epoch * steps + step) / (config.gamma_warmup_epochs * steps)
                                  : 1.0;
      const double gamma = config.gamma * std::min(1.0, progress);
      const GroupRows r0 = draw_rows(g0, b, batches);
      const GroupRows r1 = draw_rows(g1, b, batches);
      const Eigen::MatrixXd x0 = config.sample_from_density ? p0.sample(b, batches) : r0.x;
      const Eigen::MatrixXd x1 = config.sample_from_density ? p1.sample(b, batches) : r1.x;

      ad::Tape tape;
      const auto leaves0 = numerics::bind_parameters(tape, pair.f0.params());
      const auto leaves1 = numerics::bind_parameters(tape, pair.f1.params());
      const auto leaves_h = numerics::bind_parameters(tape, clf.params());
      TapeKlTerms kl;
      try {
        kl = kl_surrogate_losses(tape, pair, leaves0, leaves1, p0, p1, x0, x1);
      } catch (const NumericError& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what(), result.trace);
      }
      const ad::Var zc = ad::concat_rows(pair.f0.forward(tape.constant(r0.x), leaves0).value,
                                         pair.f1.forward(tape.constant(r1.x), leaves1).value);
      Eigen::VectorXd yc(2 * b);
      yc << r0.y, r1.y;
      const ad::Var lclf = ad::bce_with_logits(clf.logits(zc, leaves_h), yc);
      if (config.mode == Scalarization::kChebyshev) {
        normalizer.update(ad::scalar(kl.l0) + ad::scalar(kl.l1), ad::scalar(lclf));
      }
      const ad::Var joint = joint_loss(kl.l0, kl.l1, lclf, gamma, config.mode, &normalizer);
      const double jv = ad::scalar(joint);
      if (!std::isfinite(jv)) {
        throw TrainingDiverged("joint loss became non-finite at epoch " + std::to_string(epoch), result.trace);
      }
      tape.backward(joint);
      const Eigen::VectorXd g0v = numerics::gather_gradient(tape, leaves0, pair.f0.params());
      const Eigen::VectorXd g1v = numerics::gather_gradient(tape, leaves1, pair.f1.params());
      const Eigen::VectorXd ghv = numerics::gather_gradient(tape, leaves_h, clf.params());
      if (!g0v.allFinite() || !g1v.allFinite() || !ghv.allFinite()) {
        throw TrainingDiverged("non-finite gradient at epoch " + std::to_string(epoch), result.trace);
      }
      numerics::adam_update(pair.f0.params(), g0v, state0, flow_cfg);
      numerics::adam_update(pair.f1.params(), g1v, state1, flow_cfg);
      numerics::adam_update(clf.params(), ghv, state_h, clf_cfg);
      rec.l0 += ad::scalar(kl.l0) / steps;
      rec.l1 += ad::scalar(kl.l1) / steps;
      rec.clf += ad::scalar(lclf) / steps;
      rec.joint += jv / steps;
    }

    try {
      const KlTerms vkl = kl_surrogate_losses(pair, p0, p1, v0, v1);
      const Eigen::MatrixXd zv = encode(pair, val.x, val.a);
      const Eigen::VectorXd logits = clf.logits(zv);
      const double vclf = bce(logits, val.y);
      rec.val_accuracy = downstream::accuracy((logits.array() >= 0).cast<int>().matrix(), val.y);
      rec.val_joint = joint_loss(vkl.l0, vkl.l1, vclf, config.gamma, config.mode, &normalizer);
      const certify::OptimalAdversary adversary(pair, base0, base1);
      const double m0 = adversary.predict(pair.f0.forward(v0).value).cast<double>().mean();
      const double m1 = adversary.predict(pair.f1.forward(v1).value).cast<double>().mean();
      rec.val_delta = std::abs(m0 - m1);
    } catch (const NumericError& e) {
      throw TrainingDiverged("validation failed at epoch " + std::to_string(epoch) + ": " + e.what(), result.trace);
    }
    if (!std::isfinite(rec.val_joint)) {
      throw TrainingDiverged("validation loss became non-finite at epoch " + std::to_string(epoch), result.trace);
    }
    result.trace.epochs.push_back(rec);
    if (rec.val_joint < best_val) {
      best_val = rec.val_joint;
      result.best = Checkpoint{pair, clf, epoch};
    }
  }
  result.final = Checkpoint{pair, clf, config.epochs - 1};
  return result;
}

}  // namespace

FnfResult train_fnf(const TrainConfig& config, const density::GaussianMixture& p0, const density::GaussianMixture& p1,
                    const data::TabularDataset& train, const data::TabularDataset& val) {
  config.validate();
  train.validate();
  val.validate();
  const int d = train.features();
  if (p0.dim() != d || p1.dim() != d || val.features() != d) throw UsageError("densities and data differ in width");
  const data::TabularDataset g0 = train.group(0), g1 = train.group(1);
  if (g0.rows() == 0 || g1.rows() == 0) throw UsageError("training data needs rows from both groups");
  if (val.rows() == 0) throw UsageError("validation split is empty");

  const numerics::Rng root(config.seed);
  if (config.restarts == 1) {
    double score = 0;
    FnfResult r = train_once(config, p0, p1, g0, g1, val, root, score);
    r.restart_scores = {score};
    return r;
  }
  std::optional<FnfResult> best;
  std::vector<double> scores;
  std::optional<TrainingDiverged> last_failure;
  for (int r = 0; r < config.restarts; ++r) {
    double score = 0;
    try {
      FnfResult run = train_once(config, p0, p1, g0, g1, val, root.split(static_cast<std::uint64_t>(r)), score);
      scores.push_back(score);
      if (!best || score < scores[static_cast<std::size_t>(best->restart)]) {
        run.restart = r;
        best = std::move(run);
      }
    } catch (const TrainingDiverged& e) {
      scores.push_back(std::numeric_limits<double>::quiet_NaN());
      last_failure = e;
    }
  }
  if (!best) throw *last_failure;
  best->restart_scores = std::move(scores);
  return std::move(*best);
}

}  // namespace fnf::train
