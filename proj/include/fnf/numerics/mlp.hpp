#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fnf/numerics/autodiff.hpp"
#include "fnf/numerics/param_vector.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::numerics {

enum class Activation { kTanh, kRelu };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Fully connected network: hidden layers use `activation`, the output layer
// is linear. Weights live in an external ParamVector as (in x out) matrices
// followed by (1 x out) bias rows; the Mlp only records where.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, std::vector<int> hidden, int output_dim, Activation activation);

  // Appends W0, b0, W1, b1, ... under `prefix` and remembers their indices.
  void declare(ParamLayout& layout, const std::string& prefix);

  // Uniform Glorot-style initialization. The last layer's weights are scaled
  // by output_gain; a gain of 0 makes it exactly zero.
  void initialize(ParamVector& params, Rng& rng, double output_gain = 1.0) const;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x, const ParamVector& params) const;
  // `leaves` holds one tape leaf per segment of the owning ParamVector.
  ad::Var apply(const ad::Var& x, std::span<const ad::Var> leaves) const;

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  Activation activation() const { return activation_; }
  std::size_t first_segment() const { return first_segment_; }
  std::size_t layer_count() const { return hidden_.size() + 1; }

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> hidden_;
  Activation activation_ = Activation::kTanh;
  std::size_t first_segment_ = 0;
  bool declared_ = false;
};

// One tape leaf per segment, in segment order.
std::vector<ad::Var> bind_parameters(ad::Tape& tape, const ParamVector& params);
// Flattens the gradients of `leaves` in the ParamVector's layout.
Eigen::VectorXd gather_gradient(const ad::Tape& tape, std::span<const ad::Var> leaves,
                                const ParamVector& params);

// Parses "2x50" / "1x8" / "3x200" into hidden widths; "0" or "" means none.
std::vector<int> parse_architecture(const std::string& spec);
std::string format_architecture(const std::vector<int>& hidden);

}  // namespace fnf::numerics
