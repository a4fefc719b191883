#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/data/dataset.hpp"
#include "fnf/density/gmm.hpp"
#include "fnf/downstream/classifier.hpp"
#include "fnf/errors.hpp"
#include "fnf/flow/encoder.hpp"

namespace fnf::train {

enum class Scalarization { kConvex, kChebyshev };
const char* to_string(Scalarization s);
Scalarization scalarization_from_string(const std::string& s);

struct TrainConfig {
  double gamma = 0.5;
  // Ramp the fairness weight linearly from 0 to gamma over this many epochs.
  int gamma_warmup_epochs = 0;
  int epochs = 60;
  int batch_size = 128;
  // 0 means one pass over the training rows per epoch.
  int steps_per_epoch = 0;
  double lr = 0.01;
  double weight_decay = 1e-4;
  std::optional<double> flow_lr;
  std::optional<double> classifier_lr;
  bool cosine = false;
  std::uint64_t seed = 0;
  Scalarization mode = Scalarization::kConvex;
  // Draw the KL batches from the fitted densities; otherwise from the rows.
  bool sample_from_density = true;
  flow::FlowConfig flow;  // dim is taken from the data
  std::vector<int> classifier_hidden{50, 50};
  // Density samples per group for the validation distance and KL.
  int validation_samples = 4000;
  // Independent initializations; the one with the lowest best validation
  // joint loss is kept. Only useful with a positive flow.init_gain.
  int restarts = 1;

  void validate() const;
};

struct EpochRecord {
  double l0 = 0, l1 = 0, clf = 0, joint = 0;
  double val_delta = 0, val_accuracy = 0, val_joint = 0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

struct KlTerms {
  double l0 = 0, l1 = 0;
};

struct TapeKlTerms {
  ad::Var l0, l1;
};

// Monte Carlo KL(p_Z0 || p_Z1) and KL(p_Z1 || p_Z0) from batches x0 ~ p0,
// x1 ~ p1. Throws NumericError naming the offending row.
KlTerms kl_surrogate_losses(const flow::FlowEncoderPair& pair, const density::GaussianMixture& p0,
                            const density::GaussianMixture& p1, const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x1);
TapeKlTerms kl_surrogate_losses(ad::Tape& tape, const flow::FlowEncoderPair& pair, std::span<const ad::Var> leaves0,
                                std::span<const ad::Var> leaves1, const density::GaussianMixture& p0,
                                const density::GaussianMixture& p1, const Eigen::MatrixXd& x0,
                                const Eigen::MatrixXd& x1);

// Running scale of each objective, used by the Chebyshev scalarization.
// Each term is divided by an exponential average of its magnitude.
class LossNormalizer {
 public:
  explicit LossNormalizer(double momentum = 0.9) : momentum_(momentum) {}
  void update(double fairness, double classification);
  double fairness_scale() const { return fairness_; }
  double classification_scale() const { return classification_; }

 private:
  double momentum_;
  bool seeded_ = false;
  double fairness_ = 1.0;
  double classification_ = 1.0;
};

// convex: gamma (L0 + L1) + (1 - gamma) Lclf
// chebyshev: max(gamma norm(L0 + L1), (1 - gamma) norm(Lclf))
double joint_loss(double l0, double l1, double clf, double gamma, Scalarization mode,
                  const LossNormalizer* normalizer = nullptr);
ad::Var joint_loss(const ad::Var& l0, const ad::Var& l1, const ad::Var& clf, double gamma, Scalarization mode,
                   const LossNormalizer* normalizer = nullptr);

struct Checkpoint {
  flow::FlowEncoderPair pair;
  downstream::Classifier classifier;
  int epoch = -1;
};

struct FnfResult {
  Checkpoint best;   // lowest validation joint loss
  Checkpoint final;
  TrainTrace trace;
  int restart = 0;
  // Best validation joint loss of every restart; NaN where it diverged.
  std::vector<double> restart_scores;
};

// Carries the trace up to the point of divergence.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainTrace trace) : NumericError(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

// Joint training of f_0, f_1 and the classifier. The densities must have
// been fit on the training split, in the same (standardized) feature space
// as `train` and `val`.
FnfResult train_fnf(const TrainConfig& config, const density::GaussianMixture& p0, const density::GaussianMixture& p1,
                    const data::TabularDataset& train, const data::TabularDataset& val);

// Encodes each row with the encoder of its group.
Eigen::MatrixXd encode(const flow::FlowEncoderPair& pair, const Eigen::MatrixXd& x, const Eigen::VectorXi& a);

}  // namespace fnf::train
