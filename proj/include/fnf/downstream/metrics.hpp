#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "fnf/downstream/classifier.hpp"

namespace fnf::downstream {

// counts[a][y][prediction]
struct GroupConfusion {
  std::array<std::array<std::array<long, 2>, 2>, 2> counts{};

  long group_size(int a) const;
  long cell_size(int a, int y) const;
};

GroupConfusion confusion(const Eigen::VectorXi& predicted, const Eigen::VectorXi& a, const Eigen::VectorXd& y);

// Distances are in [0, 1]. A distance whose conditioning cell is empty is
// left unset rather than reported as 0.
struct FairnessMetrics {
  double threshold = 0.5;
  double accuracy = 0;
  double balanced_accuracy = 0;
  std::optional<double> demographic_parity;  // |P(h=1|a=0) - P(h=1|a=1)|
  std::array<std::optional<double>, 2> odds_gap;  // same gap conditioned on y
  std::optional<double> equalized_odds;     // max over y
  std::optional<double> equal_opportunity;  // gap at y = 1
};

FairnessMetrics eval_metrics(const Eigen::VectorXi& predicted, const Eigen::VectorXi& a, const Eigen::VectorXd& y,
                             double threshold = 0.5);
FairnessMetrics eval_metrics(const Classifier& h, const Eigen::MatrixXd& z, const Eigen::VectorXi& a,
                             const Eigen::VectorXd& y, double threshold = 0.5);

// Demographic parity recomputed from confusion counts alone.
std::optional<double> demographic_parity(const GroupConfusion& c);

}  // namespace fnf::downstream
