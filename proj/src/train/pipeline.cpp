#include "fnf/train/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "fnf/certify/attack.hpp"
#include "fnf/data/sanity.hpp"
#include "fnf/data/synthetic.hpp"
#include "fnf/downstream/classifier.hpp"
#include "fnf/errors.hpp"

namespace fnf::train {

data::DatasetSplits standardize(const data::DatasetSplits& raw, const flow::Standardizer& s) {
  data::DatasetSplits out = raw;
  for (auto* ds : {&out.train, &out.val, &out.test}) ds->x = s.apply(ds->x);
  return out;
}

density::DensityModel fit_group_density(const data::TabularDataset& train, int group, int components,
                                        numerics::Rng& rng, const density::GmmFitOptions& options) {
  const data::TabularDataset rows = train.group(group);
  if (rows.rows() == 0) throw UsageError("no training rows in group " + std::to_string(group));
  const density::GmmFit fit = density::fit_gmm(rows.x, components, rng, options);
  density::DensityMetadata meta;
  meta.group = group;
  meta.sample_count = static_cast<std::size_t>(rows.rows());
  if (!fit.log_likelihood_trace.empty()) meta.fit_log_likelihood = fit.log_likelihood_trace.back();
  meta.floored_events = fit.floored_events;
  return density::DensityModel(fit.model, meta);
}

ContinuousSetup prepare_continuous(const data::DatasetSplits& raw, int k0, int k1, std::uint64_t seed,
                                   bool standardize_features) {
  if (raw.train.schema.categorical()) throw UsageError(raw.train.name + " is categorical; use the discrete path");
  ContinuousSetup s;
  s.standardizer = standardize_features ? flow::Standardizer::fit(raw.train.x)
                                        : flow::Standardizer::identity(raw.train.features());
  s.splits = standardize(raw, s.standardizer);
  numerics::Rng rng = numerics::Rng(seed).split("density");
  numerics::Rng r0 = rng.split(0), r1 = rng.split(1);
  s.p0 = fit_group_density(s.splits.train, 0, k0, r0);
  s.p1 = fit_group_density(s.splits.train, 1, k1, r1);
  return s;
}

std::vector<int> domain_labels(const data::TabularDataset& train, const discrete::FiniteDomain& domain,
                               std::uint64_t seed, const DomainLabelOptions& options) {
  if (domain.cardinalities() != train.schema.cardinalities()) throw UsageError("domain does not match the dataset");
  data::TabularDataset points = train;
  points.x.resize(static_cast<Eigen::Index>(domain.size()), train.features());
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const std::vector<int> p = domain.point(k);
    for (std::size_t j = 0; j < p.size(); ++j) points.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = p[j];
  }
  const data::DesignEncoder enc = data::DesignEncoder::fit(train);
  numerics::Rng rng = numerics::Rng(seed).split("domain-labels");
  downstream::Classifier h(enc.width(), options.hidden);
  h.initialize(rng);
  downstream::fit_classifier(h, enc.apply(train), train.y, options.fit, rng);
  const Eigen::VectorXi pred = h.predict(enc.apply(points));
  return std::vector<int>(pred.data(), pred.data() + pred.size());
}

SyntheticExperimentConfig synthetic_experiment_defaults() {
  SyntheticExperimentConfig c;
  TrainConfig& t = c.fnf;
  t.gamma = 0.5;
  t.gamma_warmup_epochs = 10;
  t.epochs = 30;
  t.steps_per_epoch = 50;
  t.cosine = true;
  t.flow.blocks = 3;
  t.flow.hidden = {16, 16};
  t.flow.init_gain = 0.7;
  t.classifier_hidden = {20, 20};
  t.restarts = 8;
  return c;
}

SyntheticOutcome run_synthetic_fnf(const SyntheticExperimentConfig& config, std::uint64_t seed) {
  const numerics::Rng root(seed);
  const auto n = config.n_per_group;
  const data::TabularDataset train = data::make_synthetic(n, root.split("synthetic.train").next_u64());
  const data::TabularDataset val = data::make_synthetic(std::max<Eigen::Index>(1, n / 4),
                                                        root.split("synthetic.val").next_u64());
  const data::TabularDataset test = data::make_synthetic(n, root.split("synthetic.test").next_u64());
  numerics::Rng density_rng = root.split("density");
  const density::DensityModel p0 = fit_group_density(train, 0, 2, density_rng);
  const density::DensityModel p1 = fit_group_density(train, 1, 2, density_rng);

  TrainConfig tc = config.fnf;
  tc.seed = root.split("fnf").next_u64();
  const FnfResult r = train_fnf(tc, p0.gmm(), p1.gmm(), train, val);
  const Checkpoint& best = r.best;
  const Eigen::MatrixXd z_train = encode(best.pair, train.x, train.a);
  const Eigen::MatrixXd z_test = encode(best.pair, test.x, test.a);

  SyntheticOutcome out;
  out.restart = r.restart;
  out.val_delta = r.trace.epochs.at(static_cast<std::size_t>(best.epoch)).val_delta;
  out.task_accuracy = downstream::accuracy(best.classifier.predict(z_test), test.y);
  certify::AttackOptions attack;
  attack.seeds = config.attack_seeds;
  attack.fit.epochs = config.attack_epochs;
  const certify::AttackResult a = certify::attack_mlp(z_train, train.a, z_test, test.a, config.attack_hidden, attack);
  if (!a.failures.empty()) throw NumericError("attack diverged: " + a.failures.front());
  out.recovery = a.max_accuracy;
  out.attack_accuracy = a.seed_accuracy;
  return out;
}

HistogramConfig histogram_defaults() {
  HistogramConfig c;
  c.fnf = synthetic_experiment_defaults();
  c.fnf.fnf.epochs = 15;
  c.fnf.fnf.steps_per_epoch = 30;
  c.fnf.fnf.gamma_warmup_epochs = 5;
  c.fnf.fnf.validation_samples = 1000;
  c.fnf.fnf.restarts = 1;
  c.fnf.attack_seeds = {0};
  c.fnf.attack_epochs = 10;
  c.baseline.gamma = 1.0;
  c.baseline.epochs = 10;
  c.baseline.refit_epochs = 10;
  return c;
}

std::vector<HistogramRun> run_synthetic_histogram(const HistogramConfig& config, std::uint64_t seed) {
  if (config.runs < 1 || config.jobs < 1) throw UsageError("histogram runs and jobs must be positive");
  std::vector<HistogramRun> rows(static_cast<std::size_t>(config.runs));
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < config.runs; i = next++) {
      try {
        const std::uint64_t run_seed = numerics::Rng(seed).split(static_cast<std::uint64_t>(i)).next_u64();
        const SyntheticOutcome f = run_synthetic_fnf(config.fnf, run_seed);
        // The baseline sees the same train and test rows as FNF.
        const numerics::Rng root(run_seed);
        const auto n = config.fnf.n_per_group;
        const data::TabularDataset train = data::make_synthetic(n, root.split("synthetic.train").next_u64());
        const data::TabularDataset test = data::make_synthetic(n, root.split("synthetic.test").next_u64());
        AdversarialConfig b = config.baseline;
        b.seed = run_seed;
        const AdversarialResult r = train_adversarial_baseline(b, train, test);
        rows[static_cast<std::size_t>(i)] = {f.recovery, f.task_accuracy, r.recovery_rate, r.task_accuracy};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(config.jobs, config.runs); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace fnf::train
