#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fnf/numerics/mlp.hpp"
#include "fnf/numerics/param_vector.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::downstream {

// Binary classifier: an MLP producing one logit, p(y=1) = sigmoid(logit).
class Classifier {
 public:
  Classifier() = default;
  Classifier(int input_dim, std::vector<int> hidden, numerics::Activation activation = numerics::Activation::kRelu);

  void initialize(numerics::Rng& rng);

  Eigen::VectorXd logits(const Eigen::MatrixXd& z) const;
  Eigen::VectorXd probability(const Eigen::MatrixXd& z) const;
  // 1 where probability >= threshold.
  Eigen::VectorXi predict(const Eigen::MatrixXd& z, double threshold = 0.5) const;
  ad::Var logits(const ad::Var& z, std::span<const ad::Var> leaves) const;

  int input_dim() const { return mlp_.input_dim(); }
  const numerics::Mlp& mlp() const { return mlp_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::ParamVector& params() const { return params_; }

 private:
  numerics::Mlp mlp_;
  numerics::ParamVector params_;
};

struct FitOptions {
  int epochs = 30;
  int batch_size = 128;
  double lr = 0.01;
  double weight_decay = 0.0;
  bool cosine = false;
  // Weight each class by 1/(2 n_class) so the loss targets balanced accuracy.
  bool balance_classes = false;
};

// Minibatch Adam on binary cross-entropy. Returns the mean loss per epoch;
// throws NumericError on divergence.
std::vector<double> fit_classifier(Classifier& clf, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const FitOptions& options, numerics::Rng& rng);

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXd& labels);
// Mean of the per-class recalls; classes absent from `labels` are skipped.
double balanced_accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXd& labels);

// Threshold maximizing balanced accuracy of `scores` against `labels`.
double balanced_threshold(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

}  // namespace fnf::downstream
