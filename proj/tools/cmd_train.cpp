#include <iostream>

#include "cli.hpp"
#include "fnf/certify/certify.hpp"
#include "fnf/data/cache.hpp"
#include "fnf/density/categorical.hpp"
#include "fnf/errors.hpp"
#include "fnf/train/pipeline.hpp"

namespace fnf::cli {
namespace {

Json train_config_json(const train::TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"gamma_warmup_epochs", c.gamma_warmup_epochs},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"steps_per_epoch", c.steps_per_epoch},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"cosine", c.cosine},
          {"seed", c.seed},
          {"mode", train::to_string(c.mode)},
          {"sample_from_density", c.sample_from_density},
          {"flow", {{"blocks", c.flow.blocks}, {"hidden", c.flow.hidden}, {"init_gain", c.flow.init_gain}}},
          {"classifier_hidden", c.classifier_hidden},
          {"validation_samples", c.validation_samples},
          {"restarts", c.restarts}};
}

data::CsvTable trace_csv(const train::TrainTrace& trace) {
  data::CsvTable t{{"epoch", "l0", "l1", "clf", "joint", "val_delta", "val_accuracy", "val_joint"}, {}};
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    const auto& r = trace.epochs[e];
    t.rows.push_back({std::to_string(e), format_number(r.l0), format_number(r.l1), format_number(r.clf),
                      format_number(r.joint), format_number(r.val_delta), format_number(r.val_accuracy),
                      format_number(r.val_joint)});
  }
  return t;
}

double mean_log_likelihood(const density::DensityModel& m, const data::TabularDataset& ds, int group) {
  const data::TabularDataset g = ds.group(group);
  if (g.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  return m.log_density_batch(g.x).mean();
}

}  // namespace

Action add_fit_density(CLI::App& sub) {
  struct Opts {
    std::string dataset, cache = "cache", out, density = "gmm", standardize = "auto";
    int k0 = 2, k1 = 2;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--dataset", o->dataset, "Cached dataset name")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory (default runs/<dataset>)");
  sub.add_option("--density", o->density, "gmm or categorical")->capture_default_str();
  sub.add_option("--gmm-k0", o->k0, "Mixture components for group 0")->capture_default_str();
  sub.add_option("--gmm-k1", o->k1, "Mixture components for group 1")->capture_default_str();
  sub.add_option("--alpha", o->alpha, "Categorical smoothing")->capture_default_str();
  sub.add_option("--standardize", o->standardize, "auto (off for synthetic), on or off")->capture_default_str();
  sub.add_option("--seed", o->seed, "Seed")->capture_default_str();
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (o->density != "gmm" && o->density != "categorical") throw UsageError("--density must be gmm or categorical");
    if (o->density == "gmm" && (o->k0 < 1 || o->k1 < 1)) throw UsageError("--gmm-k0/--gmm-k1 must be positive");
    if (!(o->alpha > 0)) throw UsageError("--alpha must be positive");
    if (o->standardize != "auto" && o->standardize != "on" && o->standardize != "off") {
      throw UsageError("--standardize must be auto, on or off");
    }
    const data::DatasetSplits raw = load_cached(o->cache, o->dataset);
    const fs::path out = o->out.empty() ? fs::path("runs") / o->dataset : fs::path(o->out);
    Run run("fit-density", argv, out, "fit-density", o->force);
    run.seed = o->seed;
    run.input(data::cache_schema_path(o->cache, o->dataset));
    run.input(fs::path(o->cache) / (o->dataset + ".train.csv"));
    run.config = {{"dataset", o->dataset}, {"density", o->density}, {"gmm_k0", o->k0},
                  {"gmm_k1", o->k1},       {"alpha", o->alpha},     {"standardize", o->standardize}};

    std::array<density::DensityModel, 2> models;
    flow::Standardizer standardizer = flow::Standardizer::identity(raw.train.features());
    data::DatasetSplits splits = raw;
    if (o->density == "gmm") {
      if (raw.train.schema.categorical()) {
        throw UsageError(o->dataset + " has only categorical features; use --density categorical");
      }
      const bool standardize = o->standardize == "on" || (o->standardize == "auto" && o->dataset != "synthetic");
      train::ContinuousSetup s = train::prepare_continuous(raw, o->k0, o->k1, o->seed, standardize);
      models = {std::move(s.p0), std::move(s.p1)};
      standardizer = s.standardizer;
      splits = std::move(s.splits);
    } else {
      if (!raw.train.schema.categorical()) throw UsageError(o->dataset + " has continuous features; use --density gmm");
      const std::vector<int> cards = raw.train.schema.cardinalities();
      for (int g = 0; g < 2; ++g) {
        const data::TabularDataset rows = raw.train.group(g);
        density::DensityMetadata meta;
        meta.group = g;
        meta.sample_count = static_cast<std::size_t>(rows.rows());
        models[g] = density::DensityModel(density::fit_categorical(rows.codes(), cards, {}, o->alpha), meta);
      }
    }

    Json report = {{"dataset", o->dataset}, {"density", o->density}, {"groups", Json::array()}};
    for (int g = 0; g < 2; ++g) {
      Json doc = io::density_to_json(models[g]);
      doc["standardizer"] = io::standardizer_to_json(standardizer);
      doc["dataset"] = o->dataset;
      run.write_json("density_a" + std::to_string(g) + ".json", doc);
      const auto& meta = models[g].metadata();
      report["groups"].push_back({{"group", g},
                                  {"components", models[g].is_gmm() ? models[g].gmm().components() : 0},
                                  {"train_rows", meta.sample_count},
                                  {"floored_events", meta.floored_events},
                                  {"train_mean_log_likelihood", mean_log_likelihood(models[g], splits.train, g)},
                                  {"val_mean_log_likelihood", mean_log_likelihood(models[g], splits.val, g)},
                                  {"test_mean_log_likelihood", mean_log_likelihood(models[g], splits.test, g)}});
    }
    run.write_json("density_fit.json", report);
    run.finish();
    std::cout << "wrote " << (out / "density_a0.json").string() << " and " << (out / "density_a1.json").string()
              << "\n";
  };
}

Action add_train(CLI::App& sub) {
  struct Opts {
    std::string dataset, cache = "cache", densities, out, gammas, hidden = "32,32", clf_hidden = "50,50";
    std::string mode = "convex", sample_from = "density";
    double gamma = 0.5;
    int seeds = 1;
    std::uint64_t seed = 0;
    train::TrainConfig tc;
    long cert_n = 20000;
    double cert_delta = 0.05;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--dataset", o->dataset, "Cached dataset name")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--densities", o->densities, "Directory with density_a{0,1}.json (default runs/<dataset>)");
  sub.add_option("--out", o->out, "Output directory (default runs/<dataset>/train)");
  sub.add_option("--gamma", o->gamma, "Fairness weight in [0, 1]")->capture_default_str();
  sub.add_option("--gammas", o->gammas, "Comma-separated sweep; overrides --gamma");
  sub.add_option("--seeds", o->seeds, "Runs per gamma, seeds seed..seed+N-1")->capture_default_str();
  sub.add_option("--seed", o->seed, "First seed")->capture_default_str();
  sub.add_option("--epochs", o->tc.epochs, "Epochs")->capture_default_str();
  sub.add_option("--batch-size", o->tc.batch_size, "Batch size per group")->capture_default_str();
  sub.add_option("--steps-per-epoch", o->tc.steps_per_epoch, "0 = one pass over the rows")->capture_default_str();
  sub.add_option("--lr", o->tc.lr, "Adam learning rate")->capture_default_str();
  sub.add_option("--weight-decay", o->tc.weight_decay, "L2 weight decay")->capture_default_str();
  sub.add_flag("--cosine", o->tc.cosine, "Cosine learning-rate schedule");
  sub.add_option("--warmup", o->tc.gamma_warmup_epochs, "Epochs over which gamma ramps up")->capture_default_str();
  sub.add_option("--blocks", o->tc.flow.blocks, "Coupling blocks per encoder")->capture_default_str();
  sub.add_option("--hidden", o->hidden, "Coupling net hidden widths")->capture_default_str();
  sub.add_option("--init-gain", o->tc.flow.init_gain, "Random warp at initialization")->capture_default_str();
  sub.add_option("--restarts", o->tc.restarts, "Independent initializations")->capture_default_str();
  sub.add_option("--clf-hidden", o->clf_hidden, "Classifier hidden widths")->capture_default_str();
  sub.add_option("--mode", o->mode, "convex or chebyshev")->capture_default_str();
  sub.add_option("--sample-from", o->sample_from, "KL batches from the density or the rows")->capture_default_str();
  sub.add_option("--val-samples", o->tc.validation_samples, "Density samples for validation")->capture_default_str();
  sub.add_option("--cert-n", o->cert_n, "Samples for the certified distance in tradeoff.csv")->capture_default_str();
  sub.add_option("--cert-delta", o->cert_delta, "Confidence parameter for tradeoff.csv")->capture_default_str();
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    const std::vector<double> gammas = o->gammas.empty() ? std::vector<double>{o->gamma} : parse_number_list(o->gammas);
    for (double g : gammas) {
      if (!(g >= 0 && g <= 1)) throw UsageError("gamma must lie in [0, 1], got " + format_number(g));
    }
    if (o->seeds < 1) throw UsageError("--seeds must be positive");
    if (o->sample_from != "density" && o->sample_from != "rows") throw UsageError("--sample-from must be density or rows");
    train::TrainConfig base = o->tc;
    base.mode = train::scalarization_from_string(o->mode);
    base.sample_from_density = o->sample_from == "density";
    base.flow.hidden = parse_int_list(o->hidden);
    base.classifier_hidden = parse_int_list(o->clf_hidden);
    base.gamma = gammas.front();
    base.validate();

    const fs::path dens = o->densities.empty() ? fs::path("runs") / o->dataset : fs::path(o->densities);
    const Json d0 = io::read_json(dens / "density_a0.json");
    const Json d1 = io::read_json(dens / "density_a1.json");
    const density::DensityModel p0 = io::density_from_json(d0), p1 = io::density_from_json(d1);
    if (!p0.is_gmm() || !p1.is_gmm()) {
      throw UsageError("flow training needs GMM densities; categorical datasets use match-discrete");
    }
    const flow::Standardizer standardizer = io::standardizer_from_json(d0.at("standardizer"));
    const data::DatasetSplits splits = train::standardize(load_cached(o->cache, o->dataset), standardizer);
    if (splits.train.features() != p0.dim() || p0.dim() != p1.dim()) {
      throw UsageError("density dimension does not match the cached " + o->dataset + " features");
    }

    const fs::path out = o->out.empty() ? fs::path("runs") / o->dataset / "train" : fs::path(o->out);
    Run run("train", argv, out, "train", o->force);
    run.seed = o->seed;
    run.input(dens / "density_a0.json");
    run.input(dens / "density_a1.json");
    run.input(data::cache_schema_path(o->cache, o->dataset));
    run.config = {{"dataset", o->dataset}, {"gammas", gammas}, {"seeds", o->seeds}, {"train", train_config_json(base)},
                  {"cert_n", o->cert_n},   {"cert_delta", o->cert_delta}};
    Json embedded = {{"a0", d0}, {"a1", d1}};
    embedded["a0"].erase("manifest");
    embedded["a1"].erase("manifest");

    data::CsvTable tradeoff{{"dataset", "gamma", "seed", "best_epoch", "val_delta", "delta_hat", "epsilon",
                             "max_adv_acc", "test_accuracy", "test_balanced_accuracy"},
                            {}};
    for (double gamma : gammas) {
      for (int s = 0; s < o->seeds; ++s) {
        train::TrainConfig tc = base;
        tc.gamma = gamma;
        tc.seed = o->seed + static_cast<std::uint64_t>(s);
        const fs::path dir = fs::path("g" + format_number(gamma)) / ("s" + std::to_string(tc.seed));
        train::FnfResult r;
        try {
          r = train::train_fnf(tc, p0.gmm(), p1.gmm(), splits.train, splits.val);
        } catch (const train::TrainingDiverged& e) {
          run.write_csv(dir / "trace.csv", trace_csv(e.trace()));
          run.finish();
          throw;
        }
        run.write_csv(dir / "trace.csv", trace_csv(r.trace));
        for (const auto* ck : {&r.best, &r.final}) {
          io::FnfModel m{standardizer, ck->pair, ck->classifier, ck->epoch,
                         Json{{"dataset", o->dataset},
                              {"gamma", gamma},
                              {"seed", tc.seed},
                              {"restart", r.restart},
                              {"train", train_config_json(tc)},
                              {"densities", embedded}}};
          run.write_json(dir / (ck == &r.best ? "model.json" : "final.json"), io::fnf_model_to_json(m));
        }

        const certify::OptimalAdversary adversary(r.best.pair, p0, p1);
        numerics::Rng rng = numerics::Rng(tc.seed).split("certify");
        const certify::CertificationReport cert = certify::certify(adversary, o->cert_n, o->cert_delta, rng);
        const Eigen::MatrixXd z = train::encode(r.best.pair, splits.test.x, splits.test.a);
        const Eigen::VectorXi pred = r.best.classifier.predict(z);
        const double acc = downstream::accuracy(pred, splits.test.y);
        const double bacc = downstream::balanced_accuracy(pred, splits.test.y);
        const auto& best = r.trace.epochs.at(static_cast<std::size_t>(r.best.epoch));
        tradeoff.rows.push_back({o->dataset, format_number(gamma), std::to_string(tc.seed),
                                 std::to_string(r.best.epoch), format_number(best.val_delta),
                                 format_number(cert.delta_hat), format_number(cert.epsilon),
                                 format_number(cert.max_adv_acc), format_number(acc), format_number(bacc)});
        std::printf("gamma %-6s seed %-3llu epoch %-3d delta_hat %.4f test acc %.4f\n", format_number(gamma).c_str(),
                    static_cast<unsigned long long>(tc.seed), r.best.epoch, cert.delta_hat, acc);
      }
    }
    run.write_csv("tradeoff.csv", tradeoff);
    run.finish();
  };
}

}  // namespace fnf::cli
