#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/data/dataset.hpp"
#include "fnf/downstream/classifier.hpp"
#include "fnf/numerics/mlp.hpp"

namespace fnf::train {

// Min-max baseline: encoder f(x, a), classifier h and adversary g trained
// with alternating steps on L_clf - gamma L_adv.
struct AdversarialConfig {
  double gamma = 1.0;
  int epochs = 20;
  int batch_size = 128;
  double lr = 0.01;
  std::uint64_t seed = 0;
  std::vector<int> encoder_hidden{20, 20};
  std::vector<int> classifier_hidden{20};
  std::vector<int> adversary_hidden{20};
  // Adversary updates per encoder update.
  int adversary_steps = 1;
  // Architecture and epochs of the adversary refit on the frozen encoder.
  std::vector<int> refit_hidden{50, 50};
  int refit_epochs = 30;

  void validate() const;
};

struct AdversarialResult {
  numerics::Mlp encoder;
  numerics::ParamVector encoder_params;
  downstream::Classifier classifier;
  downstream::Classifier adversary;
  // Balanced accuracies on the held-out rows.
  double joint_adversary_accuracy = 0;
  double recovery_rate = 0;  // refit adversary
  double task_accuracy = 0;
  std::vector<double> clf_loss, adv_loss;  // per epoch
  bool diverged = false;
  std::string failure;

  Eigen::MatrixXd encode(const Eigen::MatrixXd& x, const Eigen::VectorXi& a) const;
};

// Divergence does not throw: the run is returned with diverged set, NaN
// accuracies and the losses seen so far.
AdversarialResult train_adversarial_baseline(const AdversarialConfig& config, const data::TabularDataset& train,
                                             const data::TabularDataset& test);

}  // namespace fnf::train
