#include "fnf/downstream/recourse.hpp"

#include <cmath>
#include <limits>

#include "fnf/errors.hpp"

namespace fnf::downstream {

std::string to_string(RecourseStatus status) {
  switch (status) {
    case RecourseStatus::kAlreadyAccepted: return "already_accepted";
    case RecourseStatus::kFound: return "found";
    case RecourseStatus::kNoRecourse: return "no_recourse";
    case RecourseStatus::kNotActionable: return "not_actionable";
  }
  return "unknown";
}

namespace {

bool accepted(const Classifier& h, const Eigen::RowVectorXd& z, double threshold) {
  return h.predict(Eigen::MatrixXd(z), threshold)[0] == 1;
}

}  // namespace

RecourseResult recourse(const flow::FlowEncoder& f_a, const Classifier& h, const Eigen::VectorXd& x,
                        const Eigen::MatrixXd& dataset_latents, const RecourseConfig& config) {
  const int d = f_a.dim();
  if (config.steps < 1) throw UsageError("recourse needs at least one interpolation step");
  if (x.size() != d || h.input_dim() != d) throw UsageError("recourse: point, flow and classifier differ in width");
  if (dataset_latents.rows() > 0 && dataset_latents.cols() != d) throw UsageError("recourse: latent width mismatch");
  if (config.standardizer && config.standardizer->dim() != d) throw UsageError("recourse: standardizer width mismatch");
  for (int j : config.immutable_features) {
    if (j < 0 || j >= d) throw UsageError("recourse: immutable feature index out of range");
  }
  if (!x.allFinite()) throw NumericError("recourse: non-finite input point");

  RecourseResult r;
  const Eigen::RowVectorXd z = f_a.forward(x.transpose()).value.row(0);
  if (accepted(h, z, config.threshold)) {
    r.status = RecourseStatus::kAlreadyAccepted;
    return r;
  }

  const Eigen::VectorXi labels = dataset_latents.rows() > 0 ? h.predict(dataset_latents, config.threshold)
                                                            : Eigen::VectorXi();
  Eigen::Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    const double dist = (dataset_latents.row(i) - z).squaredNorm();
    if (dist < best_dist) best_dist = dist, best = i;
  }
  if (best < 0) {
    r.reason = "no dataset latent is accepted";
    return r;
  }

  const Eigen::RowVectorXd target = dataset_latents.row(best);
  for (int k = 1; k <= config.steps; ++k) {
    const double t = static_cast<double>(k) / config.steps;
    const Eigen::RowVectorXd zt = (1.0 - t) * z + t * target;
    if (!accepted(h, zt, config.threshold)) continue;
    const Eigen::RowVectorXd xt = f_a.inverse(Eigen::MatrixXd(zt)).value.row(0);
    // The inverse is exact only up to roundoff, so acceptance is re-checked
    // on the re-encoded point.
    if (!accepted(h, f_a.forward(Eigen::MatrixXd(xt)).value.row(0), config.threshold)) continue;
    r.step = k;
    r.z_tilde = zt.transpose();
    r.x_tilde = xt.transpose();
    r.latent_distance = (zt - z).norm();
    r.delta = r.x_tilde - x;
    Eigen::RowVectorXd raw_x = x.transpose(), raw_xt = xt;
    if (config.standardizer) {
      raw_x = config.standardizer->invert(Eigen::MatrixXd(raw_x)).row(0);
      raw_xt = config.standardizer->invert(Eigen::MatrixXd(raw_xt)).row(0);
    }
    r.delta_raw = (raw_xt - raw_x).transpose();
    r.status = RecourseStatus::kFound;
    for (int j : config.immutable_features) {
      if (std::round(raw_xt[j]) != std::round(raw_x[j])) r.status = RecourseStatus::kNotActionable;
    }
    if (r.status == RecourseStatus::kNotActionable) r.reason = "an immutable feature changes";
    return r;
  }
  r.reason = "no interpolation point survives the re-check";
  return r;
}

}  // namespace fnf::downstream
