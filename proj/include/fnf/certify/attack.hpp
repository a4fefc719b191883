#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/certify/certify.hpp"
#include "fnf/downstream/classifier.hpp"

namespace fnf::certify {

struct AttackOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  downstream::FitOptions fit{.epochs = 30, .batch_size = 128, .lr = 0.01, .weight_decay = 0.0, .cosine = false,
                             .balance_classes = true};
};

// Trains an MLP adversary to predict a from z on the training latents and
// reports its balanced accuracy on the held-out latents, per seed and max.
AttackResult attack_mlp(const Eigen::MatrixXd& z_train, const Eigen::VectorXi& a_train, const Eigen::MatrixXd& z_test,
                        const Eigen::VectorXi& a_test, const std::vector<int>& hidden, const AttackOptions& options);

// The default suite: 1x8, 2x50, 3x200.
std::vector<std::vector<int>> default_attack_architectures();

}  // namespace fnf::certify
