#include "fnf/numerics/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::numerics {

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& point, double step) {
  if (!(step > 0)) throw UsageError("finite-difference step must be positive");
  Eigen::VectorXd g(point.size());
  Eigen::VectorXd probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = f(probe);
    probe[i] = point[i] - step;
    const double down = f(probe);
    probe[i] = point[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("non-finite loss while probing coordinate " + std::to_string(i));
    }
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double grad_check(const LossFunction& loss_fn, const Eigen::VectorXd& point, double step) {
  const GradResult at = loss_fn(point);
  if (!std::isfinite(at.loss)) throw NumericError("non-finite loss at the check point");
  if (at.gradient.size() != point.size()) throw UsageError("gradient length differs from parameter length");
  const Eigen::VectorXd numeric =
      central_difference([&](const Eigen::VectorXd& p) { return loss_fn(p).loss; }, point, step);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double a = at.gradient[i];
    worst = std::max(worst, std::abs(a - numeric[i]) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

AdamResult adam_step(const Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                     const AdamState& state, const AdamConfig& config) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw UsageError("adam_step: shape mismatch between parameters, gradient and state");
  }
  if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");
  AdamResult out{params, state};
  Eigen::VectorXd g = grad;
  if (config.weight_decay != 0.0) g += config.weight_decay * params;
  out.state.step = state.step + 1;
  out.state.m = config.beta1 * state.m + (1.0 - config.beta1) * g;
  out.state.v = config.beta2 * state.v + (1.0 - config.beta2) * g.cwiseProduct(g);
  const double t = static_cast<double>(out.state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  out.params = params.array() -
               config.lr * (out.state.m.array() / c1) / ((out.state.v.array() / c2).sqrt() + config.eps);
  if (!out.params.allFinite()) throw NumericError("adam_step produced non-finite parameters");
  return out;
}

void adam_update(ParamVector& params, const Eigen::VectorXd& grad, AdamState& state,
                 const AdamConfig& config) {
  AdamResult r = adam_step(params.as_vector(), grad, state, config);
  params.as_vector() = r.params;
  state = std::move(r.state);
}

double scheduled_lr(double base_lr, int epoch, int total, bool cosine) {
  if (!cosine || total <= 1) return base_lr;
  const double progress = static_cast<double>(epoch) / static_cast<double>(total);
  return 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace fnf::numerics
