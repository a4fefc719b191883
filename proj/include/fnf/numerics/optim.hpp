#pragma once

#include <functional>

#include <Eigen/Dense>

#include "fnf/numerics/param_vector.hpp"

namespace fnf::numerics {

// Loss value plus its gradient, aligned with the parameter vector.
struct GradResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

using LossFunction = std::function<GradResult(const Eigen::VectorXd&)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// Throws NumericError if the loss is non-finite at any probe point.
double grad_check(const LossFunction& loss_fn, const Eigen::VectorXd& point, double step = 1e-5);

// Two-sided finite-difference gradient of a scalar function.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& point, double step = 1e-5);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Coupled L2 penalty added to the gradient.
  double weight_decay = 0.0;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static AdamState zeros(Eigen::Index n) {
    return AdamState{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

struct AdamResult {
  Eigen::VectorXd params;
  AdamState state;
};

// Bias-corrected Adam update. Pure: identical inputs give identical outputs.
AdamResult adam_step(const Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                     const AdamState& state, const AdamConfig& config);

// In-place variant used by the trainers.
void adam_update(ParamVector& params, const Eigen::VectorXd& grad, AdamState& state,
                 const AdamConfig& config);

// Learning rate at `epoch` of `total` under optional cosine decay.
double scheduled_lr(double base_lr, int epoch, int total, bool cosine);

}  // namespace fnf::numerics
