#include "fnf/downstream/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnf/errors.hpp"
#include "fnf/numerics/optim.hpp"

namespace fnf::downstream {

Classifier::Classifier(int input_dim, std::vector<int> hidden, numerics::Activation activation)
    : mlp_(input_dim, std::move(hidden), 1, activation) {
  numerics::ParamLayout layout;
  mlp_.declare(layout, "clf");
  params_ = numerics::ParamVector(layout);
}

void Classifier::initialize(numerics::Rng& rng) { mlp_.initialize(params_, rng); }

Eigen::VectorXd Classifier::logits(const Eigen::MatrixXd& z) const {
  if (z.cols() != input_dim()) throw UsageError("classifier input has the wrong width");
  return mlp_.apply(z, params_).col(0);
}

Eigen::VectorXd Classifier::probability(const Eigen::MatrixXd& z) const {
  return (1.0 / (1.0 + (-logits(z).array()).exp())).matrix();
}

Eigen::VectorXi Classifier::predict(const Eigen::MatrixXd& z, double threshold) const {
  return (probability(z).array() >= threshold).cast<int>().matrix();
}

ad::Var Classifier::logits(const ad::Var& z, std::span<const ad::Var> leaves) const { return mlp_.apply(z, leaves); }

std::vector<double> fit_classifier(Classifier& clf, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const FitOptions& options, numerics::Rng& rng) {
  const Eigen::Index n = x.rows();
  if (n == 0 || y.size() != n) throw UsageError("classifier training data is empty or misaligned");
  if (options.batch_size < 1 || options.epochs < 1) throw UsageError("epochs and batch size must be positive");
  Eigen::VectorXd sample_weight = Eigen::VectorXd::Ones(n);
  if (options.balance_classes) {
    const double pos = y.sum();
    const double neg = static_cast<double>(n) - pos;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = y[i] > 0.5 ? pos : neg;
      sample_weight[i] = static_cast<double>(n) / (2 * c);
    }
  }
  numerics::AdamState state = numerics::AdamState::zeros(static_cast<Eigen::Index>(clf.params().size()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<double> trace;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    numerics::AdamConfig cfg;
    cfg.lr = numerics::scheduled_lr(options.lr, epoch, options.epochs, options.cosine);
    cfg.weight_decay = options.weight_decay;
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += options.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(options.batch_size, n - start);
      Eigen::MatrixXd xb(b, x.cols());
      Eigen::VectorXd yb(b), wb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index r = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = x.row(r);
        yb[i] = y[r];
        wb[i] = sample_weight[r];
      }
      ad::Tape tape;
      const auto leaves = numerics::bind_parameters(tape, clf.params());
      const ad::Var loss = ad::bce_with_logits(clf.logits(tape.constant(xb), leaves), yb, wb);
      tape.backward(loss);
      const double value = ad::scalar(loss);
      if (!std::isfinite(value)) throw NumericError("classifier loss diverged at epoch " + std::to_string(epoch));
      numerics::adam_update(clf.params(), numerics::gather_gradient(tape, leaves, clf.params()), state, cfg);
      loss_sum += value;
      ++batches;
    }
    trace.push_back(loss_sum / batches);
  }
  return trace;
}

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXd& labels) {
  if (predicted.size() != labels.size() || labels.size() == 0) throw UsageError("accuracy inputs misaligned");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) hits += (predicted[i] == (labels[i] > 0.5 ? 1 : 0)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double balanced_accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXd& labels) {
  if (predicted.size() != labels.size() || labels.size() == 0) throw UsageError("accuracy inputs misaligned");
  double hits[2] = {0, 0}, counts[2] = {0, 0};
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int c = labels[i] > 0.5 ? 1 : 0;
    counts[c] += 1;
    hits[c] += predicted[i] == c ? 1 : 0;
  }
  double sum = 0;
  int classes = 0;
  for (int c = 0; c < 2; ++c) {
    if (counts[c] > 0) {
      sum += hits[c] / counts[c];
      ++classes;
    }
  }
  return sum / classes;
}

double balanced_threshold(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size() || scores.size() == 0) throw UsageError("threshold inputs misaligned");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  const double pos = (labels.array() > 0.5).count();
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) return 0.5;
  // Sweep thresholds upward: everything at or above the threshold is 1.
  double tp = pos, tn = 0;
  double best = 0.5 * (tp / pos + tn / neg);
  double best_threshold = scores[idx[0]];
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (labels[idx[k]] > 0.5) {
      tp -= 1;
    } else {
      tn += 1;
    }
    if (k + 1 < idx.size() && scores[idx[k + 1]] == scores[idx[k]]) continue;
    const double value = 0.5 * (tp / pos + tn / neg);
    if (value > best) {
      best = value;
      best_threshold = k + 1 < idx.size() ? 0.5 * (scores[idx[k]] + scores[idx[k + 1]])
                                          : std::nextafter(scores[idx[k]], std::numeric_limits<double>::infinity());
    }
  }
  return best_threshold;
}

}  // namespace fnf::downstream
