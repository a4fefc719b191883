#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/downstream/classifier.hpp"
#include "fnf/flow/encoder.hpp"

namespace fnf::downstream {

struct RecourseConfig {
  int steps = 100;
  // Column indices that may not change. They are treated as integer codes:
  // a column is unchanged when its rounded raw value is unchanged.
  std::vector<int> immutable_features;
  // Maps the flow's input space to raw units. Without it raw deltas equal
  // the input-space deltas.
  std::optional<flow::Standardizer> standardizer;
  double threshold = 0.5;
};

enum class RecourseStatus { kAlreadyAccepted, kFound, kNoRecourse, kNotActionable };

std::string to_string(RecourseStatus status);

struct RecourseResult {
  RecourseStatus status = RecourseStatus::kNoRecourse;
  Eigen::VectorXd x_tilde;    // input space; empty unless a candidate was found
  Eigen::VectorXd delta;      // x_tilde - x in input (standardized) units
  Eigen::VectorXd delta_raw;  // same in raw units
  Eigen::VectorXd z_tilde;    // accepted interpolation point
  double latent_distance = 0;  // |z_tilde - f_a(x)|
  int step = 0;                // interpolation step, 1..steps
  std::string reason;
};

// Moves the latent of x toward the nearest accepted row of `dataset_latents`
// and returns the earliest interpolation point whose preimage is accepted.
RecourseResult recourse(const flow::FlowEncoder& f_a, const Classifier& h, const Eigen::VectorXd& x,
                        const Eigen::MatrixXd& dataset_latents, const RecourseConfig& config = {});

}  // namespace fnf::downstream
