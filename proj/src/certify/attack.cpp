#include "fnf/certify/attack.hpp"

#include <cmath>
#include <limits>

#include "fnf/errors.hpp"

namespace fnf::certify {

AttackResult attack_mlp(const Eigen::MatrixXd& z_train, const Eigen::VectorXi& a_train, const Eigen::MatrixXd& z_test,
                        const Eigen::VectorXi& a_test, const std::vector<int>& hidden, const AttackOptions& options) {
  if (z_train.cols() != z_test.cols()) throw UsageError("attack train/test latents differ in width");
  if (options.seeds.empty()) throw UsageError("attack needs at least one seed");
  AttackResult result;
  result.architecture = numerics::format_architecture(hidden);
  const Eigen::VectorXd labels = a_train.cast<double>();
  const Eigen::VectorXd test_labels = a_test.cast<double>();
  for (std::uint64_t seed : options.seeds) {
    numerics::Rng rng(seed);
    numerics::Rng init = rng.split("attack.init");
    numerics::Rng batches = rng.split("attack.batches");
    downstream::Classifier adversary(static_cast<int>(z_train.cols()), hidden);
    adversary.initialize(init);
    try {
      downstream::fit_classifier(adversary, z_train, labels, options.fit, batches);
      const double acc = downstream::balanced_accuracy(adversary.predict(z_test), test_labels);
      result.seed_accuracy.push_back(acc);
      result.max_accuracy = std::max(result.max_accuracy, acc);
    } catch (const NumericError& e) {
      result.seed_accuracy.push_back(std::numeric_limits<double>::quiet_NaN());
      result.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  return result;
}

std::vector<std::vector<int>> default_attack_architectures() { return {{8}, {50, 50}, {200, 200, 200}}; }

}  // namespace fnf::certify
