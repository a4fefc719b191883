#include "fnf/numerics/autodiff.hpp"

#include <cmath>
#include <string>

#include "fnf/errors.hpp"

namespace fnf::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw UsageError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

void require_same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw UsageError("operands recorded on different tapes");
}

}  // namespace

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || nodes_[p.id()].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs, false});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& output) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw UsageError("backward() needs a scalar output");
  }
  Node& out = nodes_[output.id()];
  if (!out.requires_grad) return;
  out.grad = Matrix::Ones(1, 1);
  out.has_grad = true;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backward) {
      // Closures only accumulate into parents, which precede this node.
      n.backward(*this, n.grad);
    }
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id()];
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) throw UsageError("matmul: inner dimension mismatch");
  Tape& t = a.tape();
  return t.record(a.value() * b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value().transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, a.value().transpose() * g);
  });
}

Var operator+(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "add");
  return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var operator-(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "sub");
  return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, -g);
  });
}

Var operator-(const Var& a) {
  return a.tape().record(-a.value(), {a}, [a](Tape& tp, const Matrix& g) { tp.accumulate(a, -g); });
}

Var operator*(const Var& a, double c) {
  return a.tape().record(a.value() * c, {a},
                         [a, c](Tape& tp, const Matrix& g) { tp.accumulate(a, g * c); });
}

Var operator*(double c, const Var& a) { return a * c; }

Var hadamard(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "hadamard");
  return a.tape().record(a.value().cwiseProduct(b.value()), {a, b},
                         [a, b](Tape& tp, const Matrix& g) {
                           tp.accumulate(a, g.cwiseProduct(b.value()));
                           tp.accumulate(b, g.cwiseProduct(a.value()));
                         });
}

Var add_scalar(const Var& a, double c) {
  return a.tape().record(a.value().array() + c, {a},
                         [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g); });
}

Var add_row(const Var& a, const Var& row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw UsageError("add_row: row shape mismatch");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape().record(std::move(out), {a, row}, [a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(row, g.colwise().sum());
  });
}

Var tanh(const Var& a) {
  Tape& t = a.tape();
  Matrix y = tanh_values(a.value());
  const std::size_t self = t.size();
  return t.record(std::move(y), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(self);
    tp.accumulate(a, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var exp(const Var& a) {
  Tape& t = a.tape();
  const std::size_t self = t.size();
  return t.record(a.value().array().exp().matrix(), {a}, [a, self](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(tp.value(self)));
  });
}

Var log(const Var& a) {
  return a.tape().record(a.value().array().log().matrix(), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (g.array() / a.value().array()).matrix());
  });
}

Var relu(const Var& a) {
  return a.tape().record(a.value().cwiseMax(0.0), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (a.value().array() > 0.0).select(g, 0.0).matrix());
  });
}

Var sigmoid(const Var& a) {
  Tape& t = a.tape();
  const std::size_t self = t.size();
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return t.record(std::move(y), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(self);
    tp.accumulate(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var select_cols(const Var& a, std::span<const int> cols) {
  std::vector<int> idx(cols.begin(), cols.end());
  Matrix out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.value().col(idx[j]);
  return a.tape().record(std::move(out), {a}, [a, idx](Tape& tp, const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) full.col(idx[j]) += g.col(static_cast<Eigen::Index>(j));
    tp.accumulate(a, full);
  });
}

Var merge_cols(const Var& a, std::span<const int> cols_a, const Var& b,
               std::span<const int> cols_b, Eigen::Index total) {
  require_same_tape(a, b);
  if (a.rows() != b.rows()) throw UsageError("merge_cols: row mismatch");
  if (static_cast<Eigen::Index>(cols_a.size()) != a.cols() ||
      static_cast<Eigen::Index>(cols_b.size()) != b.cols() ||
      static_cast<Eigen::Index>(cols_a.size() + cols_b.size()) != total) {
    throw UsageError("merge_cols: column map does not cover the output");
  }
  std::vector<int> ia(cols_a.begin(), cols_a.end());
  std::vector<int> ib(cols_b.begin(), cols_b.end());
  Matrix out(a.rows(), total);
  for (std::size_t j = 0; j < ia.size(); ++j) out.col(ia[j]) = a.value().col(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < ib.size(); ++j) out.col(ib[j]) = b.value().col(static_cast<Eigen::Index>(j));
  return a.tape().record(std::move(out), {a, b}, [a, b, ia, ib](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) {
      Matrix ga(g.rows(), static_cast<Eigen::Index>(ia.size()));
      for (std::size_t j = 0; j < ia.size(); ++j) ga.col(static_cast<Eigen::Index>(j)) = g.col(ia[j]);
      tp.accumulate(a, ga);
    }
    if (tp.requires_grad(b)) {
      Matrix gb(g.rows(), static_cast<Eigen::Index>(ib.size()));
      for (std::size_t j = 0; j < ib.size(); ++j) gb.col(static_cast<Eigen::Index>(j)) = g.col(ib[j]);
      tp.accumulate(b, gb);
    }
  });
}

Var concat_rows(const Var& a, const Var& b) {
  require_same_tape(a, b);
  if (a.cols() != b.cols()) throw UsageError("concat_rows: column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a.value();
  out.bottomRows(b.rows()) = b.value();
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  return a.tape().record(std::move(out), {a, b}, [a, b, na, nb](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.topRows(na));
    tp.accumulate(b, g.bottomRows(nb));
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape().record(std::move(out), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw UsageError("mean of an empty matrix");
  return sum(a) * (1.0 / n);
}

Var row_sum(const Var& a) {
  return a.tape().record(a.value().rowwise().sum(), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g * Eigen::RowVectorXd::Ones(a.cols()));
  });
}

Var bce_with_logits(const Var& logits, const Eigen::VectorXd& labels) {
  return bce_with_logits(logits, labels, Eigen::VectorXd::Ones(labels.size()));
}

Var bce_with_logits(const Var& logits, const Eigen::VectorXd& labels, const Eigen::VectorXd& weights) {
  if (logits.cols() != 1 || logits.rows() != labels.size() || weights.size() != labels.size()) {
    throw UsageError("bce_with_logits: logits must be a column matching the labels");
  }
  const double total = weights.sum();
  if (!(total > 0)) throw UsageError("bce_with_logits: weights must have positive sum");
  const Eigen::ArrayXd l = logits.value().col(0).array();
  // softplus(l) - y*l, evaluated stably.
  const Eigen::ArrayXd sp = l.max(0.0) + (-l.abs()).exp().log1p();
  Matrix out(1, 1);
  out(0, 0) = (weights.array() * (sp - labels.array() * l)).sum() / total;
  return logits.tape().record(std::move(out), {logits},
                              [logits, labels, weights, total](Tape& tp, const Matrix& g) {
                                const Eigen::ArrayXd p = 1.0 / (1.0 + (-logits.value().col(0).array()).exp());
                                Matrix grad = ((p - labels.array()) * weights.array() * (g(0, 0) / total)).matrix();
                                tp.accumulate(logits, grad);
                              });
}

Var max_scalar(const Var& a, const Var& b) {
  require_same_tape(a, b);
  if (a.value().size() != 1 || b.value().size() != 1) throw UsageError("max_scalar needs 1x1 operands");
  const bool take_a = a.value()(0, 0) >= b.value()(0, 0);
  Matrix out = take_a ? a.value() : b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b, take_a](Tape& tp, const Matrix& g) {
    if (take_a) {
      tp.accumulate(a, g);
    } else {
      tp.accumulate(b, g);
    }
  });
}

double scalar(const Var& v) {
  if (v.value().size() != 1) throw UsageError("scalar() on a non-scalar node");
  return v.value()(0, 0);
}

Matrix tanh_values(const Matrix& x) {
  return (1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0)).matrix();
}

}  // namespace fnf::ad
