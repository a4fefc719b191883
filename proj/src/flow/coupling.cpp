#include "fnf/flow/coupling.hpp"

#include "fnf/errors.hpp"

namespace fnf::flow {

CouplingLayer::CouplingLayer(int dim, int parity, const std::vector<int>& hidden, numerics::Activation activation,
                             double scale_clamp)
    : dim_(dim), parity_(parity), scale_clamp_(scale_clamp) {
  if (dim < 1) throw UsageError("coupling layer needs at least one dimension");
  if (parity != 0 && parity != 1) throw UsageError("coupling parity must be 0 or 1");
  if (!(scale_clamp > 0)) throw UsageError("scale clamp must be positive");
  if (dim == 1) {
    active_ = {0};
  } else {
    for (int j = 0; j < dim; ++j) (j % 2 == parity ? active_ : passive_).push_back(j);
  }
  const int in = static_cast<int>(passive_.size());
  const int out = static_cast<int>(active_.size());
  scale_net_ = numerics::Mlp(in, hidden, out, activation);
  translate_net_ = numerics::Mlp(in, hidden, out, activation);
}

void CouplingLayer::declare(numerics::ParamLayout& layout, const std::string& prefix) {
  scale_net_.declare(layout, prefix + ".s");
  translate_net_.declare(layout, prefix + ".t");
}

void CouplingLayer::initialize(numerics::ParamVector& params, numerics::Rng& rng, double output_gain) const {
  scale_net_.initialize(params, rng, output_gain);
  translate_net_.initialize(params, rng, output_gain);
}

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  return out;
}

}  // namespace

void CouplingLayer::scale_shift(const Eigen::MatrixXd& x, const numerics::ParamVector& params, Eigen::MatrixXd& s,
                                Eigen::MatrixXd& t) const {
  const Eigen::MatrixXd cond = gather(x, passive_);
  const Eigen::MatrixXd raw = scale_net_.apply(cond, params);
  s = scale_clamp_ * ad::tanh_values(raw / scale_clamp_);
  t = translate_net_.apply(cond, params);
}

void CouplingLayer::scale_shift(const ad::Var& x, std::span<const ad::Var> leaves, ad::Var& s, ad::Var& t) const {
  const ad::Var cond = ad::select_cols(x, passive_);
  s = ad::tanh(scale_net_.apply(cond, leaves) * (1.0 / scale_clamp_)) * scale_clamp_;
  t = translate_net_.apply(cond, leaves);
}

void CouplingLayer::forward(Eigen::MatrixXd& x, Eigen::VectorXd& log_det, const numerics::ParamVector& params) const {
  Eigen::MatrixXd s, t;
  scale_shift(x, params, s, t);
  for (std::size_t j = 0; j < active_.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    x.col(active_[j]) = (x.col(active_[j]).array() * s.col(c).array().exp() + t.col(c).array()).matrix();
  }
  log_det += s.rowwise().sum();
}

void CouplingLayer::inverse(Eigen::MatrixXd& z, Eigen::VectorXd& log_det, const numerics::ParamVector& params) const {
  Eigen::MatrixXd s, t;
  scale_shift(z, params, s, t);
  for (std::size_t j = 0; j < active_.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    z.col(active_[j]) = ((z.col(active_[j]).array() - t.col(c).array()) * (-s.col(c).array()).exp()).matrix();
  }
  log_det -= s.rowwise().sum();
}

ad::Var CouplingLayer::forward(const ad::Var& x, std::span<const ad::Var> leaves, ad::Var& log_det) const {
  ad::Var s, t;
  scale_shift(x, leaves, s, t);
  const ad::Var moved = ad::hadamard(ad::select_cols(x, active_), ad::exp(s)) + t;
  log_det = log_det + ad::row_sum(s);
  return ad::merge_cols(moved, active_, ad::select_cols(x, passive_), passive_, dim_);
}

ad::Var CouplingLayer::inverse(const ad::Var& z, std::span<const ad::Var> leaves, ad::Var& log_det) const {
  ad::Var s, t;
  scale_shift(z, leaves, s, t);
  const ad::Var moved = ad::hadamard(ad::select_cols(z, active_) - t, ad::exp(-s));
  log_det = log_det - ad::row_sum(s);
  return ad::merge_cols(moved, active_, ad::select_cols(z, passive_), passive_, dim_);
}

}  // namespace fnf::flow
