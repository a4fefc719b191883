#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fnf/density/model.hpp"
#include "fnf/flow/coupling.hpp"
#include "fnf/numerics/param_vector.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::flow {

struct FlowConfig {
  int dim = 0;
  // One block is two coupling layers with complementary masks.
  int blocks = 4;
  std::vector<int> hidden{32, 32};
  numerics::Activation activation = numerics::Activation::kTanh;
  double scale_clamp = 5.0;
  // Gain on the coupling nets' output weights at initialization. 0 starts
  // the flow at the identity; a positive gain starts from a random warp.
  double init_gain = 0.0;
};

struct FlowOutput {
  Eigen::MatrixXd value;
  Eigen::VectorXd log_det;
};

struct TapeFlowOutput {
  ad::Var value;
  ad::Var log_det;  // rows x 1
};

// Invertible encoder f_a. Owns its parameters.
class FlowEncoder {
 public:
  FlowEncoder() = default;
  FlowEncoder(const FlowConfig& config, int group);

  void initialize(numerics::Rng& rng);

  // Throw NumericError naming the layer if an intermediate turns non-finite.
  FlowOutput forward(const Eigen::MatrixXd& x) const;
  FlowOutput inverse(const Eigen::MatrixXd& z) const;

  // `leaves` from numerics::bind_parameters(tape, params()).
  TapeFlowOutput forward(const ad::Var& x, std::span<const ad::Var> leaves) const;
  TapeFlowOutput inverse(const ad::Var& z, std::span<const ad::Var> leaves) const;

  int dim() const { return config_.dim; }
  int group() const { return group_; }
  const FlowConfig& config() const { return config_; }
  const std::vector<CouplingLayer>& layers() const { return layers_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::ParamVector& params() const { return params_; }

 private:
  void check_input(const Eigen::MatrixXd& x) const;

  FlowConfig config_;
  int group_ = 0;
  std::vector<CouplingLayer> layers_;
  numerics::ParamVector params_;
};

struct FlowEncoderPair {
  FlowEncoder f0;
  FlowEncoder f1;

  FlowEncoderPair() = default;
  FlowEncoderPair(const FlowConfig& config, numerics::Rng& rng);

  const FlowEncoder& encoder(int group) const;
  FlowEncoder& encoder(int group);
};

// log p_{Z_a}(z) = log p_a(f_a^{-1}(z)) + log|det d f_a^{-1}(z) / dz| per row.
Eigen::VectorXd latent_log_density(const FlowEncoder& encoder, const density::DensityModel& base,
                                   const Eigen::MatrixXd& z);
Eigen::VectorXd latent_log_density(const FlowEncoderPair& pair, const std::array<const density::DensityModel*, 2>& bases,
                                   int group, const Eigen::MatrixXd& z);
// Differentiable in both z and the encoder parameters; the base must be a GMM.
ad::Var latent_log_density(const FlowEncoder& encoder, std::span<const ad::Var> leaves,
                           const density::GaussianMixture& base, const ad::Var& z);

// Per-feature affine standardization applied before encoding.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  static Standardizer identity(int dim);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

}  // namespace fnf::flow
