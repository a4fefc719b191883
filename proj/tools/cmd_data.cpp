#include <algorithm>
#include <cmath>
#include <iostream>

#include "cli.hpp"
#include "fnf/data/cache.hpp"
#include "fnf/data/sanity.hpp"
#include "fnf/errors.hpp"
#include "fnf/train/pipeline.hpp"

namespace fnf::cli {
namespace {

// Raw files named by a dataset's column manifest, for input hashing.
std::vector<fs::path> raw_files(const data::LoadConfig& config, const std::string& dataset) {
  std::vector<fs::path> out;
  if (dataset == "synthetic") return out;
  const Json m = io::read_json(config.schema_dir / (dataset + ".json"));
  for (const auto& [key, file] : m.at("files").items()) out.push_back(config.root / dataset / file.get<std::string>());
  return out;
}

data::Variant parse_variant(const std::string& s) {
  if (s == "preprocessed") return data::Variant::kPreprocessed;
  if (s == "original") return data::Variant::kOriginal;
  throw UsageError("--variant must be preprocessed or original");
}

}  // namespace

Action add_synth(CLI::App& sub) {
  struct Opts {
    std::string cache = "cache", out = "runs/synthetic";
    std::uint64_t seed = 0;
    long n = 5000;
    int runs = 0, jobs = 1;
    long hist_n = 0;
    int fnf_epochs = 0, baseline_epochs = 0, attack_epochs = 0;
    double baseline_gamma = 0;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  const train::HistogramConfig hd = train::histogram_defaults();
  o->hist_n = hd.fnf.n_per_group;
  o->fnf_epochs = hd.fnf.fnf.epochs;
  o->baseline_epochs = hd.baseline.epochs;
  o->attack_epochs = hd.fnf.attack_epochs;
  o->baseline_gamma = hd.baseline.gamma;
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--seed", o->seed, "Seed")->capture_default_str();
  sub.add_option("--n", o->n, "Rows per group in the train and test splits")->capture_default_str();
  sub.add_option("--runs", o->runs, "Histogram: number of seeds for FNF and the adversarial baseline");
  sub.add_option("--out", o->out, "Histogram output directory")->capture_default_str();
  sub.add_option("--jobs", o->jobs, "Histogram worker threads")->capture_default_str();
  sub.add_option("--hist-n", o->hist_n, "Histogram: training rows per group")->capture_default_str();
  sub.add_option("--fnf-epochs", o->fnf_epochs, "Histogram: FNF epochs")->capture_default_str();
  sub.add_option("--baseline-epochs", o->baseline_epochs, "Histogram: baseline epochs")->capture_default_str();
  sub.add_option("--attack-epochs", o->attack_epochs, "Histogram: refit adversary epochs")->capture_default_str();
  sub.add_option("--baseline-gamma", o->baseline_gamma, "Histogram: baseline adversarial weight")->capture_default_str();
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (o->n < 1 || o->hist_n < 4 || o->jobs < 1) throw UsageError("--n, --hist-n and --jobs must be positive");
    if (o->runs == 0) {
      Run run("synth", argv, o->cache, "prepare-synthetic", o->force);
      data::LoadConfig lc = data::default_load_config();
      lc.seed = o->seed;
      lc.synthetic_train_per_group = o->n;
      lc.synthetic_test_per_group = o->n;
      run.seed = o->seed;
      run.config = {{"dataset", "synthetic"}, {"n_per_group", o->n}};
      const data::DatasetSplits splits = data::load_dataset("synthetic", lc);
      data::save_cache(o->cache, splits, {o->seed, "preprocessed"});
      run.cache_outputs("synthetic");
      run.finish();
      std::cout << "synthetic: " << splits.train.rows() << "/" << splits.val.rows() << "/" << splits.test.rows()
                << " rows written to " << o->cache << "\n";
      return;
    }

    Run run("synth", argv, o->out, "histogram", o->force);
    run.seed = o->seed;
    train::HistogramConfig hc = train::histogram_defaults();
    hc.runs = o->runs;
    hc.jobs = o->jobs;
    hc.fnf.n_per_group = o->hist_n;
    hc.fnf.fnf.epochs = o->fnf_epochs;
    hc.fnf.fnf.gamma_warmup_epochs = std::min(hc.fnf.fnf.gamma_warmup_epochs, o->fnf_epochs / 3);
    hc.fnf.attack_epochs = o->attack_epochs;
    hc.baseline.gamma = o->baseline_gamma;
    hc.baseline.epochs = o->baseline_epochs;
    hc.baseline.refit_epochs = o->attack_epochs;
    run.config = {{"runs", o->runs},
                  {"n_per_group", o->hist_n},
                  {"fnf", {{"epochs", hc.fnf.fnf.epochs}, {"gamma", hc.fnf.fnf.gamma}, {"blocks", hc.fnf.fnf.flow.blocks}}},
                  {"baseline", {{"epochs", hc.baseline.epochs}, {"gamma", hc.baseline.gamma}}},
                  {"attack", {{"hidden", hc.fnf.attack_hidden}, {"epochs", hc.fnf.attack_epochs}}}};
    const std::vector<train::HistogramRun> rows = train::run_synthetic_histogram(hc, o->seed);

    data::CsvTable runs_csv{{"run", "fnf_recovery", "fnf_accuracy", "baseline_recovery", "baseline_accuracy"}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      runs_csv.rows.push_back({std::to_string(i), format_number(r.fnf_recovery), format_number(r.fnf_accuracy),
                               format_number(r.baseline_recovery), format_number(r.baseline_accuracy)});
    }
    run.write_csv("histogram_runs.csv", runs_csv);

    // 0.025-wide bins over [0.4, 1]; values outside are clamped to the ends.
    constexpr int kBins = 24;
    std::vector<int> fnf_counts(kBins), baseline_counts(kBins);
    auto bin = [](double v) { return std::clamp(static_cast<int>(std::floor((v - 0.4) / 0.025)), 0, kBins - 1); };
    int fnf_near = 0, baseline_above = 0;
    for (const auto& r : rows) {
      ++fnf_counts[bin(r.fnf_recovery)];
      ++baseline_counts[bin(r.baseline_recovery)];
      fnf_near += std::abs(r.fnf_recovery - 0.5) <= 0.02;
      baseline_above += r.baseline_recovery > 0.55;
    }
    data::CsvTable hist{{"lo", "hi", "fnf", "baseline"}, {}};
    for (int k = 0; k < kBins; ++k) {
      hist.rows.push_back({format_number(0.4 + 0.025 * k), format_number(0.4 + 0.025 * (k + 1)),
                           std::to_string(fnf_counts[k]), std::to_string(baseline_counts[k])});
    }
    run.write_csv("histogram.csv", hist);
    const double n = static_cast<double>(rows.size());
    run.write_json("histogram_summary.json", {{"runs", o->runs},
                                              {"fnf_fraction_within_0.02_of_0.5", fnf_near / n},
                                              {"baseline_fraction_above_0.55", baseline_above / n}});
    run.finish();
    std::cout << "FNF recovery within 0.02 of 0.5: " << fnf_near << "/" << o->runs
              << "; baseline recovery above 0.55: " << baseline_above << "/" << o->runs << "\n";
  };
}

Action add_prepare(CLI::App& sub) {
  struct Opts {
    std::string dataset, cache = "cache", data_root, variant = "preprocessed";
    std::uint64_t seed = 0;
    int compas_bins = 5;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--dataset", o->dataset, "adult, compas, crime, law or synthetic")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--data-root", o->data_root, "Raw data root (default: FNF_DATA_ROOT or ./data)");
  sub.add_option("--variant", o->variant, "preprocessed or original")->capture_default_str();
  sub.add_option("--seed", o->seed, "Split seed")->capture_default_str();
  sub.add_option("--compas-bins", o->compas_bins, "Quantile bins for Compas numeric columns")->capture_default_str();
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    data::LoadConfig lc = data::default_load_config();
    if (!o->data_root.empty()) lc.root = o->data_root;
    lc.seed = o->seed;
    lc.compas_bins = o->compas_bins;
    lc.variant = parse_variant(o->variant);
    Run run("prepare", argv, o->cache, "prepare-" + o->dataset, o->force);
    run.seed = o->seed;
    run.config = {{"dataset", o->dataset}, {"variant", o->variant}, {"compas_bins", o->compas_bins}};
    const data::DatasetSplits splits = data::load_dataset(o->dataset, lc);
    for (const fs::path& p : raw_files(lc, o->dataset)) run.input(p);
    data::save_cache(o->cache, splits, {o->seed, o->variant});
    run.cache_outputs(o->dataset);
    run.finish();
    std::cout << o->dataset << ": " << splits.train.rows() << "/" << splits.val.rows() << "/" << splits.test.rows()
              << " rows, " << splits.train.features() << " features, written to " << o->cache << "\n";
  };
}

Action add_sanity(CLI::App& sub) {
  struct Opts {
    std::vector<std::string> datasets{"adult", "compas", "crime", "law"};
    std::string data_root, out = "runs/sanity";
    std::uint64_t seed = 0;
    int seeds = 5, epochs = 20;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--dataset", o->datasets, "Datasets to compare")->capture_default_str();
  sub.add_option("--data-root", o->data_root, "Raw data root (default: FNF_DATA_ROOT or ./data)");
  sub.add_option("--seed", o->seed, "Split seed")->capture_default_str();
  sub.add_option("--seeds", o->seeds, "Training runs per variant")->capture_default_str();
  sub.add_option("--epochs", o->epochs, "Training epochs")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory")->capture_default_str();
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    data::LoadConfig lc = data::default_load_config();
    if (!o->data_root.empty()) lc.root = o->data_root;
    lc.seed = o->seed;
    Run run("sanity", argv, o->out, "sanity", o->force);
    run.seed = o->seed;
    run.config = {{"datasets", o->datasets}, {"seeds", o->seeds}, {"epochs", o->epochs}};
    data::SanityOptions opts;
    opts.seeds = o->seeds;
    opts.fit.epochs = o->epochs;
    data::CsvTable table{{"dataset", "original_mean", "original_std", "preprocessed_mean", "preprocessed_std", "gap"},
                         {}};
    Json results = Json::array();
    for (const std::string& name : o->datasets) {
      for (const fs::path& p : raw_files(lc, name)) run.input(p);
      const data::SanityResult r = data::preprocessing_sanity(name, lc, opts);
      const double gap = r.original_mean - r.preprocessed_mean;
      table.rows.push_back({name, format_number(r.original_mean), format_number(r.original_std),
                            format_number(r.preprocessed_mean), format_number(r.preprocessed_std), format_number(gap)});
      results.push_back({{"dataset", name},
                         {"original", r.original},
                         {"preprocessed", r.preprocessed},
                         {"original_mean", r.original_mean},
                         {"preprocessed_mean", r.preprocessed_mean},
                         {"gap", gap}});
      std::printf("%-8s original %.4f +- %.4f  preprocessed %.4f +- %.4f  gap %+.4f\n", name.c_str(), r.original_mean,
                  r.original_std, r.preprocessed_mean, r.preprocessed_std, gap);
    }
    run.write_csv("sanity.csv", table);
    run.write_json("sanity.json", {{"results", results}});
    run.finish();
  };
}

}  // namespace fnf::cli
