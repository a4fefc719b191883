#include "fnf/flow/encoder.hpp"

#include <cmath>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::flow {

FlowEncoder::FlowEncoder(const FlowConfig& config, int group) : config_(config), group_(group) {
  if (config.dim < 1) throw UsageError("flow dimension must be positive");
  if (config.blocks < 1) throw UsageError("flow needs at least one block");
  if (group != 0 && group != 1) throw UsageError("flow group must be 0 or 1");
  if (!(config.init_gain >= 0)) throw UsageError("flow init gain must be non-negative");
  numerics::ParamLayout layout;
  for (int l = 0; l < 2 * config.blocks; ++l) {
    layers_.emplace_back(config.dim, l % 2, config.hidden, config.activation, config.scale_clamp);
    layers_.back().declare(layout, "layer" + std::to_string(l));
  }
  params_ = numerics::ParamVector(layout);
}

void FlowEncoder::initialize(numerics::Rng& rng) {
  for (const auto& layer : layers_) layer.initialize(params_, rng, config_.init_gain);
}

void FlowEncoder::check_input(const Eigen::MatrixXd& x) const {
  if (x.cols() != dim()) {
    throw UsageError("flow expects " + std::to_string(dim()) + " features, got " + std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw NumericError("flow input contains non-finite values");
}

FlowOutput FlowEncoder::forward(const Eigen::MatrixXd& x) const {
  check_input(x);
  FlowOutput out{x, Eigen::VectorXd::Zero(x.rows())};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].forward(out.value, out.log_det, params_);
    if (!out.value.allFinite() || !out.log_det.allFinite()) {
      throw NumericError("non-finite value after forward coupling layer " + std::to_string(l));
    }
  }
  return out;
}

FlowOutput FlowEncoder::inverse(const Eigen::MatrixXd& z) const {
  check_input(z);
  FlowOutput out{z, Eigen::VectorXd::Zero(z.rows())};
  for (std::size_t l = layers_.size(); l-- > 0;) {
    layers_[l].inverse(out.value, out.log_det, params_);
    if (!out.value.allFinite() || !out.log_det.allFinite()) {
      throw NumericError("non-finite value after inverse coupling layer " + std::to_string(l));
    }
  }
  return out;
}

TapeFlowOutput FlowEncoder::forward(const ad::Var& x, std::span<const ad::Var> leaves) const {
  if (x.cols() != dim()) throw UsageError("flow input has the wrong width");
  ad::Var v = x;
  ad::Var log_det = x.tape().constant(Eigen::MatrixXd::Zero(x.rows(), 1));
  for (const auto& layer : layers_) v = layer.forward(v, leaves, log_det);
  return {v, log_det};
}

TapeFlowOutput FlowEncoder::inverse(const ad::Var& z, std::span<const ad::Var> leaves) const {
  if (z.cols() != dim()) throw UsageError("flow input has the wrong width");
  ad::Var v = z;
  ad::Var log_det = z.tape().constant(Eigen::MatrixXd::Zero(z.rows(), 1));
  for (std::size_t l = layers_.size(); l-- > 0;) v = layers_[l].inverse(v, leaves, log_det);
  return {v, log_det};
}

FlowEncoderPair::FlowEncoderPair(const FlowConfig& config, numerics::Rng& rng) : f0(config, 0), f1(config, 1) {
  numerics::Rng r0 = rng.split("flow.f0");
  numerics::Rng r1 = rng.split("flow.f1");
  f0.initialize(r0);
  f1.initialize(r1);
}

const FlowEncoder& FlowEncoderPair::encoder(int group) const {
  if (group == 0) return f0;
  if (group == 1) return f1;
  throw UsageError("group must be 0 or 1");
}

FlowEncoder& FlowEncoderPair::encoder(int group) {
  return const_cast<FlowEncoder&>(std::as_const(*this).encoder(group));
}

Eigen::VectorXd latent_log_density(const FlowEncoder& encoder, const density::DensityModel& base,
                                   const Eigen::MatrixXd& z) {
  if (base.dim() != encoder.dim()) throw UsageError("base density and flow dimensions differ");
  const FlowOutput inv = encoder.inverse(z);
  return base.log_density_batch(inv.value) + inv.log_det;
}

Eigen::VectorXd latent_log_density(const FlowEncoderPair& pair, const std::array<const density::DensityModel*, 2>& bases,
                                   int group, const Eigen::MatrixXd& z) {
  const auto* base = bases.at(static_cast<std::size_t>(group == 1));
  if (base == nullptr) throw UsageError("missing base density");
  return latent_log_density(pair.encoder(group), *base, z);
}

ad::Var latent_log_density(const FlowEncoder& encoder, std::span<const ad::Var> leaves,
                           const density::GaussianMixture& base, const ad::Var& z) {
  const TapeFlowOutput inv = encoder.inverse(z, leaves);
  return density::gmm_log_density(inv.value, base) + inv.log_det;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw UsageError("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  s.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale[j] > 1e-12)) s.scale[j] = 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(int dim) {
  return {Eigen::RowVectorXd::Zero(dim), Eigen::RowVectorXd::Ones(dim)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw UsageError("standardizer width mismatch");
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw UsageError("standardizer width mismatch");
  return (x.array().rowwise() * scale.array()).matrix().rowwise() + mean;
}

}  // namespace fnf::flow
