#include "fnf/downstream/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fnf/errors.hpp"

namespace fnf::downstream {

long GroupConfusion::group_size(int a) const { return cell_size(a, 0) + cell_size(a, 1); }

long GroupConfusion::cell_size(int a, int y) const { return counts[a][y][0] + counts[a][y][1]; }

GroupConfusion confusion(const Eigen::VectorXi& predicted, const Eigen::VectorXi& a, const Eigen::VectorXd& y) {
  if (predicted.size() != a.size() || a.size() != y.size()) throw UsageError("metric inputs differ in length");
  GroupConfusion c;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (predicted[i] != 0 && predicted[i] != 1)) {
      throw UsageError("groups and predictions must be 0/1");
    }
    c.counts[a[i]][y[i] > 0.5 ? 1 : 0][predicted[i]] += 1;
  }
  return c;
}

std::optional<double> demographic_parity(const GroupConfusion& c) {
  if (c.group_size(0) == 0 || c.group_size(1) == 0) return std::nullopt;
  double rate[2];
  for (int g = 0; g < 2; ++g) {
    rate[g] = static_cast<double>(c.counts[g][0][1] + c.counts[g][1][1]) / static_cast<double>(c.group_size(g));
  }
  return std::abs(rate[0] - rate[1]);
}

FairnessMetrics eval_metrics(const Eigen::VectorXi& predicted, const Eigen::VectorXi& a, const Eigen::VectorXd& y,
                             double threshold) {
  if (a.size() == 0) throw UsageError("metrics need at least one row");
  const GroupConfusion c = confusion(predicted, a, y);
  FairnessMetrics m;
  m.threshold = threshold;
  m.accuracy = accuracy(predicted, y);
  m.balanced_accuracy = balanced_accuracy(predicted, y);

  // Direct path: positive rates from the prediction vector.
  double positives[2] = {0, 0}, sizes[2] = {0, 0};
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    positives[a[i]] += predicted[i];
    sizes[a[i]] += 1;
  }
  if (sizes[0] > 0 && sizes[1] > 0) m.demographic_parity = std::abs(positives[0] / sizes[0] - positives[1] / sizes[1]);

  for (int label = 0; label < 2; ++label) {
    if (c.cell_size(0, label) == 0 || c.cell_size(1, label) == 0) continue;
    const double r0 = static_cast<double>(c.counts[0][label][1]) / static_cast<double>(c.cell_size(0, label));
    const double r1 = static_cast<double>(c.counts[1][label][1]) / static_cast<double>(c.cell_size(1, label));
    m.odds_gap[label] = std::abs(r0 - r1);
  }
  if (m.odds_gap[0] && m.odds_gap[1]) m.equalized_odds = std::max(*m.odds_gap[0], *m.odds_gap[1]);
  m.equal_opportunity = m.odds_gap[1];
  return m;
}

FairnessMetrics eval_metrics(const Classifier& h, const Eigen::MatrixXd& z, const Eigen::VectorXi& a,
                             const Eigen::VectorXd& y, double threshold) {
  return eval_metrics(h.predict(z, threshold), a, y, threshold);
}

}  // namespace fnf::downstream
