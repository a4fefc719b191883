#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/numerics/autodiff.hpp"
#include "fnf/numerics/mlp.hpp"
#include "fnf/numerics/param_vector.hpp"

namespace fnf::flow {

// Affine coupling: the active columns are mapped to
//   x_a * exp(s(x_p)) + t(x_p),  s = s_max * tanh(raw / s_max),
// where x_p are the passive (conditioning) columns. With parity p the
// active set is the columns whose index has parity p. In one dimension
// there is nothing to condition on, and the layer is a learned elementwise
// affine map.
class CouplingLayer {
 public:
  CouplingLayer() = default;
  CouplingLayer(int dim, int parity, const std::vector<int>& hidden, numerics::Activation activation,
                double scale_clamp);

  void declare(numerics::ParamLayout& layout, const std::string& prefix);
  // output_gain 0 leaves the layer at the identity.
  void initialize(numerics::ParamVector& params, numerics::Rng& rng, double output_gain = 0.0) const;

  // In place on rows of x; adds the per-row log|det J| to log_det.
  void forward(Eigen::MatrixXd& x, Eigen::VectorXd& log_det, const numerics::ParamVector& params) const;
  void inverse(Eigen::MatrixXd& z, Eigen::VectorXd& log_det, const numerics::ParamVector& params) const;

  ad::Var forward(const ad::Var& x, std::span<const ad::Var> leaves, ad::Var& log_det) const;
  ad::Var inverse(const ad::Var& z, std::span<const ad::Var> leaves, ad::Var& log_det) const;

  int dim() const { return dim_; }
  int parity() const { return parity_; }
  double scale_clamp() const { return scale_clamp_; }
  const std::vector<int>& active() const { return active_; }
  const std::vector<int>& passive() const { return passive_; }
  const numerics::Mlp& scale_net() const { return scale_net_; }
  const numerics::Mlp& translate_net() const { return translate_net_; }

 private:
  // Clamped log-scales and shifts for the active columns.
  void scale_shift(const Eigen::MatrixXd& x, const numerics::ParamVector& params, Eigen::MatrixXd& s,
                   Eigen::MatrixXd& t) const;
  void scale_shift(const ad::Var& x, std::span<const ad::Var> leaves, ad::Var& s, ad::Var& t) const;

  int dim_ = 0;
  int parity_ = 0;
  double scale_clamp_ = 5.0;
  std::vector<int> active_;
  std::vector<int> passive_;
  numerics::Mlp scale_net_;
  numerics::Mlp translate_net_;
};

}  // namespace fnf::flow
