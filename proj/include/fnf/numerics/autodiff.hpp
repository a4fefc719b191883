#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fnf::ad {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a matrix-valued node on a Tape. Cheap to copy. Rows index the
// batch, columns index features.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recording of matrix operations. Nodes are appended in
// evaluation order, so the reverse sweep is a single backwards pass.
// A tape records one loss evaluation and is then discarded.
class Tape {
 public:
  // Receives the gradient of the final output w.r.t. this node's value.
  using Backward = std::function<void(Tape&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value);
  Var constant(Matrix value);
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);

  // Seeds d(output)/d(output) = 1 for a 1x1 output and propagates.
  void backward(const Var& output);

  // Gradient w.r.t. a node; zeros if nothing flowed into it.
  Matrix grad(const Var& v) const;

  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

  template <class Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.has_grad) {
      n.grad += g;
    } else {
      n.grad = g;
      n.has_grad = true;
    }
  }

  std::size_t size() const { return nodes_.size(); }
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
    bool has_grad = false;
  };
  std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// Elementwise and linear-algebra primitives.
Var matmul(const Var& a, const Var& b);
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, double c);
Var operator*(double c, const Var& a);
Var hadamard(const Var& a, const Var& b);
Var add_scalar(const Var& a, double c);
// Adds a 1 x cols row to every row of `a`.
Var add_row(const Var& a, const Var& row);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);

// Column gather/scatter used by coupling layers.
Var select_cols(const Var& a, std::span<const int> cols);
// Builds a (rows x total) matrix whose columns `cols_a` come from `a` and
// `cols_b` from `b`. Every output column must be covered exactly once.
Var merge_cols(const Var& a, std::span<const int> cols_a, const Var& b,
               std::span<const int> cols_b, Eigen::Index total);
Var concat_rows(const Var& a, const Var& b);

// Reductions.
Var sum(const Var& a);       // 1 x 1
Var mean(const Var& a);      // 1 x 1
Var row_sum(const Var& a);   // rows x 1

// Mean binary cross-entropy of logits (rows x 1) against 0/1 labels.
Var bce_with_logits(const Var& logits, const Eigen::VectorXd& labels);
// Weighted mean: sum_i w_i l_i / sum_i w_i.
Var bce_with_logits(const Var& logits, const Eigen::VectorXd& labels, const Eigen::VectorXd& weights);
// Elementwise max of two 1x1 scalars (subgradient to the larger one).
Var max_scalar(const Var& a, const Var& b);

double scalar(const Var& v);

// Elementwise tanh written through exp, which Eigen vectorizes for doubles.
Matrix tanh_values(const Matrix& x);

}  // namespace fnf::ad
