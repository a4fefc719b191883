#pragma once

#include <cstdint>
#include <vector>

#include "fnf/data/loaders.hpp"
#include "fnf/density/gmm.hpp"
#include "fnf/density/model.hpp"
#include "fnf/discrete/matching.hpp"
#include "fnf/downstream/classifier.hpp"
#include "fnf/flow/encoder.hpp"
#include "fnf/train/adversarial.hpp"
#include "fnf/train/fnf.hpp"

namespace fnf::train {

data::DatasetSplits standardize(const data::DatasetSplits& raw, const flow::Standardizer& s);

// GMM with k components on the training rows of one group.
density::DensityModel fit_group_density(const data::TabularDataset& train, int group, int components,
                                        numerics::Rng& rng, const density::GmmFitOptions& options = {});

struct ContinuousSetup {
  data::DatasetSplits splits;  // standardized
  flow::Standardizer standardizer;
  density::DensityModel p0, p1;
};

// Standardizes with training statistics (identity when `standardize` is
// false) and fits one GMM per group.
ContinuousSetup prepare_continuous(const data::DatasetSplits& raw, int k0, int k1, std::uint64_t seed,
                                   bool standardize = true);

// Predicted label of every domain point, from an MLP on one-hot features
// fit to the training rows of both groups. Used to split the discrete
// matching by label.
struct DomainLabelOptions {
  std::vector<int> hidden{50, 50};
  downstream::FitOptions fit{.epochs = 20};
};
std::vector<int> domain_labels(const data::TabularDataset& train, const discrete::FiniteDomain& domain,
                               std::uint64_t seed, const DomainLabelOptions& options = {});

// The two-mixture experiment: FNF trained on fresh synthetic data, then an
// MLP adversary refit on the frozen latents.
struct SyntheticExperimentConfig {
  Eigen::Index n_per_group = 4000;
  TrainConfig fnf;
  std::vector<int> attack_hidden{50, 50};
  std::vector<std::uint64_t> attack_seeds{0, 1, 2, 3, 4};
  int attack_epochs = 30;
};

// Settings that reach the label-consistent solution; see README.
SyntheticExperimentConfig synthetic_experiment_defaults();

struct SyntheticOutcome {
  double recovery = 0;  // max balanced accuracy of the refit adversaries
  std::vector<double> attack_accuracy;
  double task_accuracy = 0;
  double val_delta = 0;  // best checkpoint
  int restart = 0;
};

SyntheticOutcome run_synthetic_fnf(const SyntheticExperimentConfig& config, std::uint64_t seed);

// Many cheap runs of FNF and of the adversarial baseline on fresh data,
// for the distribution of adversary recovery rates.
struct HistogramConfig {
  int runs = 100;
  SyntheticExperimentConfig fnf;
  AdversarialConfig baseline;
  int jobs = 1;  // worker threads
};

// Single-restart FNF with a shorter schedule, one 10-epoch refit adversary.
HistogramConfig histogram_defaults();

struct HistogramRun {
  double fnf_recovery = 0, fnf_accuracy = 0;
  double baseline_recovery = 0, baseline_accuracy = 0;
};

// Run i uses seed Rng(seed).split(i); results do not depend on `jobs`.
std::vector<HistogramRun> run_synthetic_histogram(const HistogramConfig& config, std::uint64_t seed);

}  // namespace fnf::train
