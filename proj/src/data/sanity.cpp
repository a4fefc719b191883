#include "fnf/data/sanity.hpp"

#include <cmath>

#include "fnf/errors.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::data {

DesignEncoder DesignEncoder::fit(const TabularDataset& train) {
  if (train.rows() == 0) throw UsageError("design encoder needs training rows");
  DesignEncoder e;
  const auto d = train.x.cols();
  e.mean_ = Eigen::RowVectorXd::Zero(d);
  e.scale_ = Eigen::RowVectorXd::Ones(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const bool categorical = static_cast<Eigen::Index>(train.schema.columns.size()) == d &&
                             train.schema.columns[static_cast<std::size_t>(j)].type == ColumnType::kCategorical;
    if (categorical) {
      const int k = static_cast<int>(train.schema.columns[static_cast<std::size_t>(j)].categories.size());
      e.cardinality_.push_back(k);
      e.width_ += k;
    } else {
      const auto col = train.x.col(j);
      e.mean_[j] = col.mean();
      const double sd = std::sqrt((col.array() - e.mean_[j]).square().mean());
      e.scale_[j] = sd > 0 ? sd : 1.0;
      e.cardinality_.push_back(0);
      e.width_ += 1;
    }
  }
  return e;
}

Eigen::MatrixXd DesignEncoder::apply(const TabularDataset& ds) const {
  if (ds.x.cols() != static_cast<Eigen::Index>(cardinality_.size())) throw UsageError("design encoder width mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ds.rows(), width_);
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < cardinality_.size(); ++j) {
    const auto col = ds.x.col(static_cast<Eigen::Index>(j));
    if (cardinality_[j] == 0) {
      out.col(offset) = (col.array() - mean_[static_cast<Eigen::Index>(j)]) / scale_[static_cast<Eigen::Index>(j)];
      offset += 1;
    } else {
      for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        const auto code = static_cast<Eigen::Index>(col[i]);
        if (code < 0 || code >= cardinality_[j]) throw SchemaError("category code out of range");
        out(i, offset + code) = 1.0;
      }
      offset += cardinality_[j];
    }
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

std::vector<double> accuracies(const DatasetSplits& s, const SanityOptions& options, std::uint64_t base_seed) {
  const DesignEncoder enc = DesignEncoder::fit(s.train);
  const Eigen::MatrixXd x_train = enc.apply(s.train), x_test = enc.apply(s.test);
  std::vector<double> out;
  for (int k = 0; k < options.seeds; ++k) {
    numerics::Rng rng = numerics::Rng(base_seed).split(static_cast<std::uint64_t>(k));
    downstream::Classifier h(enc.width(), options.hidden);
    h.initialize(rng);
    downstream::fit_classifier(h, x_train, s.train.y, options.fit, rng);
    out.push_back(downstream::accuracy(h.predict(x_test), s.test.y));
  }
  return out;
}

}  // namespace

SanityResult preprocessing_sanity(const std::string& name, const LoadConfig& config, const SanityOptions& options) {
  if (options.seeds < 1) throw UsageError("sanity check needs at least one seed");
  if (name == "synthetic") throw UsageError("the synthetic data has no original variant");
  LoadConfig c = config;
  SanityResult r;
  r.dataset = name;
  c.variant = Variant::kOriginal;
  r.original = accuracies(load_dataset(name, c), options, config.seed);
  c.variant = Variant::kPreprocessed;
  r.preprocessed = accuracies(load_dataset(name, c), options, config.seed);
  std::tie(r.original_mean, r.original_std) = mean_std(r.original);
  std::tie(r.preprocessed_mean, r.preprocessed_std) = mean_std(r.preprocessed);
  return r;
}

}  // namespace fnf::data
