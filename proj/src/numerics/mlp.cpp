#include "fnf/numerics/mlp.hpp"

#include <cmath>

#include "fnf/errors.hpp"

namespace fnf::numerics {

const char* to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw UsageError("unknown activation: " + s);
}

Mlp::Mlp(int input_dim, std::vector<int> hidden, int output_dim, Activation activation)
    : input_dim_(input_dim), output_dim_(output_dim), hidden_(std::move(hidden)), activation_(activation) {
  if (input_dim < 0 || output_dim <= 0) throw UsageError("invalid MLP dimensions");
  for (int h : hidden_) {
    if (h <= 0) throw UsageError("hidden widths must be positive");
  }
}

void Mlp::declare(ParamLayout& layout, const std::string& prefix) {
  int in = input_dim_;
  std::vector<int> widths = hidden_;
  widths.push_back(output_dim_);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::size_t w = layout.add(prefix + ".W" + std::to_string(l), in, widths[l]);
    layout.add(prefix + ".b" + std::to_string(l), 1, widths[l]);
    if (l == 0) first_segment_ = w;
    in = widths[l];
  }
  declared_ = true;
}

void Mlp::initialize(ParamVector& params, Rng& rng, double output_gain) const {
  if (!declared_) throw UsageError("Mlp::initialize before declare");
  for (std::size_t l = 0; l < layer_count(); ++l) {
    auto w = params.matrix(first_segment_ + 2 * l);
    auto b = params.matrix(first_segment_ + 2 * l + 1);
    b.setZero();
    const bool last = l + 1 == layer_count();
    if (last && output_gain == 0.0) {
      w.setZero();
      continue;
    }
    const double fan = static_cast<double>(w.rows() + w.cols());
    const double limit = (fan > 0 ? std::sqrt(6.0 / fan) : 0.0) * (last ? output_gain : 1.0);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    }
  }
}

Eigen::MatrixXd Mlp::apply(const Eigen::MatrixXd& x, const ParamVector& params) const {
  if (x.cols() != input_dim_) throw UsageError("Mlp input width mismatch");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto w = params.matrix(first_segment_ + 2 * l);
    const auto b = params.matrix(first_segment_ + 2 * l + 1);
    Eigen::MatrixXd next = h * w;
    next.rowwise() += b.row(0);
    if (l + 1 < layer_count()) {
      if (activation_ == Activation::kTanh) {
        next = ad::tanh_values(next);
      } else {
        next = next.cwiseMax(0.0);
      }
    }
    h = std::move(next);
  }
  return h;
}

ad::Var Mlp::apply(const ad::Var& x, std::span<const ad::Var> leaves) const {
  if (x.cols() != input_dim_) throw UsageError("Mlp input width mismatch");
  ad::Var h = x;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    h = ad::add_row(ad::matmul(h, leaves[first_segment_ + 2 * l]), leaves[first_segment_ + 2 * l + 1]);
    if (l + 1 < layer_count()) h = activation_ == Activation::kTanh ? ad::tanh(h) : ad::relu(h);
  }
  return h;
}

std::vector<ad::Var> bind_parameters(ad::Tape& tape, const ParamVector& params) {
  std::vector<ad::Var> leaves;
  leaves.reserve(params.segments().size());
  for (std::size_t i = 0; i < params.segments().size(); ++i) leaves.push_back(tape.leaf(params.matrix(i)));
  return leaves;
}

Eigen::VectorXd gather_gradient(const ad::Tape& tape, std::span<const ad::Var> leaves,
                                const ParamVector& params) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Segment& s = params.segments()[i];
    const ad::Matrix gi = tape.grad(leaves[i]);
    g.segment(static_cast<Eigen::Index>(s.offset), static_cast<Eigen::Index>(s.size())) =
        Eigen::Map<const Eigen::VectorXd>(gi.data(), gi.size());
  }
  return g;
}

std::vector<int> parse_architecture(const std::string& spec) {
  if (spec.empty() || spec == "0") return {};
  const auto x = spec.find('x');
  if (x == std::string::npos) throw UsageError("architecture must look like LAYERSxWIDTH: " + spec);
  int layers = 0;
  int width = 0;
  try {
    layers = std::stoi(spec.substr(0, x));
    width = std::stoi(spec.substr(x + 1));
  } catch (const std::exception&) {
    throw UsageError("architecture must look like LAYERSxWIDTH: " + spec);
  }
  if (layers < 0 || width <= 0) throw UsageError("invalid architecture: " + spec);
  return std::vector<int>(static_cast<std::size_t>(layers), width);
}

std::string format_architecture(const std::vector<int>& hidden) {
  if (hidden.empty()) return "0";
  bool uniform = true;
  for (int h : hidden) uniform = uniform && h == hidden.front();
  if (uniform) return std::to_string(hidden.size()) + "x" + std::to_string(hidden.front());
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "-" : "") + std::to_string(hidden[i]);
  return s;
}

}  // namespace fnf::numerics
