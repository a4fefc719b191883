#include <iostream>
#include <map>

#include "cli.hpp"
#include "fnf/certify/attack.hpp"
#include "fnf/data/cache.hpp"
#include "fnf/density/categorical.hpp"
#include "fnf/downstream/metrics.hpp"
#include "fnf/downstream/recourse.hpp"
#include "fnf/errors.hpp"
#include "fnf/train/fnf.hpp"
#include "fnf/train/pipeline.hpp"

namespace fnf::cli {
namespace {

struct Checkpoint {
  fs::path path;
  io::FnfModel model;
  density::DensityModel p0, p1;
  std::string dataset;
  double gamma = 0;
  std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const fs::path& path) {
  Checkpoint c;
  c.path = path;
  c.model = io::fnf_model_from_json(io::read_json(path));
  const Json& info = c.model.info;
  if (!info.contains("densities") || !info.contains("dataset")) {
    throw SchemaError(path.string() + " lacks the embedded densities written by train");
  }
  c.p0 = io::density_from_json(info.at("densities").at("a0"));
  c.p1 = io::density_from_json(info.at("densities").at("a1"));
  c.dataset = info.at("dataset").get<std::string>();
  c.gamma = info.value("gamma", 0.0);
  c.seed = info.value("seed", std::uint64_t{0});
  return c;
}

data::DatasetSplits standardized(const fs::path& cache, const Checkpoint& c) {
  return train::standardize(load_cached(cache, c.dataset), c.model.standardizer);
}

Json report_json(const certify::CertificationReport& r) {
  return {{"delta_hat", r.delta_hat},
          {"n", r.n},
          {"epsilon", r.epsilon},
          {"delta", r.delta},
          {"max_adversarial_accuracy", r.max_adv_acc},
          {"demographic_parity_bound", r.demographic_parity_bound}};
}

fs::path default_out(const std::string& out, const fs::path& checkpoint) {
  return out.empty() ? checkpoint.parent_path() : fs::path(out);
}

}  // namespace

Action add_certify(CLI::App& sub) {
  struct Opts {
    std::string checkpoint, out;
    long n = 100000;
    double delta = 0.05;
    std::uint64_t seed = 0;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--checkpoint", o->checkpoint, "model.json written by train")->required();
  sub.add_option("--n", o->n, "Samples per group")->capture_default_str();
  sub.add_option("--delta", o->delta, "Failure probability of the bound")->capture_default_str();
  sub.add_option("--seed", o->seed, "Sampling seed")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory (default: the checkpoint's)");
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (o->n < 1) throw UsageError("--n must be positive");
    if (!(o->delta > 0 && o->delta < 1)) throw UsageError("--delta must lie in (0, 1)");
    const Checkpoint c = load_checkpoint(o->checkpoint);
    Run run("certify", argv, default_out(o->out, o->checkpoint), "certify", o->force);
    run.seed = o->seed;
    run.input(o->checkpoint);
    run.config = {{"n", o->n}, {"delta", o->delta}};
    const certify::OptimalAdversary adversary(c.model.pair, c.p0, c.p1);
    numerics::Rng rng(o->seed);
    const certify::CertificationReport r = certify::certify(adversary, o->n, o->delta, rng);
    Json doc = report_json(r);
    doc["dataset"] = c.dataset;
    doc["gamma"] = c.gamma;
    doc["checkpoint_seed"] = c.seed;
    run.write_json("certificate.json", doc);
    run.write_csv("certificate.csv", {{"dataset", "gamma", "seed", "delta_hat", "n", "epsilon", "delta",
                                       "max_adversarial_accuracy", "demographic_parity_bound"},
                                      {{c.dataset, format_number(c.gamma), std::to_string(c.seed),
                                        format_number(r.delta_hat), std::to_string(r.n), format_number(r.epsilon),
                                        format_number(r.delta), format_number(r.max_adv_acc),
                                        format_number(r.demographic_parity_bound)}}});
    run.finish();
    std::printf("dataset                  %s\n", c.dataset.c_str());
    std::printf("statistical distance     %.6f\n", r.delta_hat);
    std::printf("epsilon (n=%ld, d=%.3g)  %.6f\n", o->n, o->delta, r.epsilon);
    std::printf("max adversarial acc.     %.6f\n", r.max_adv_acc);
    std::printf("demographic parity bound %.6f\n", r.demographic_parity_bound);
  };
}

Action add_attack(CLI::App& sub) {
  struct Opts {
    std::string checkpoint, cache = "cache", out, certificate;
    std::vector<std::string> archs{"1x8", "2x50", "3x200"};
    int seeds = 5, epochs = 30;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--checkpoint", o->checkpoint, "model.json written by train")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--arch", o->archs, "Adversary architectures, e.g. 2x50")->delimiter(',')->capture_default_str();
  sub.add_option("--seeds", o->seeds, "Adversary seeds 0..N-1")->capture_default_str();
  sub.add_option("--epochs", o->epochs, "Adversary epochs")->capture_default_str();
  sub.add_option("--certificate", o->certificate, "certificate.json to compare against");
  sub.add_option("--out", o->out, "Output directory (default: the checkpoint's)");
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (o->seeds < 1 || o->epochs < 1) throw UsageError("--seeds and --epochs must be positive");
    std::vector<std::vector<int>> hidden;
    for (const auto& a : o->archs) hidden.push_back(parse_architecture(a));
    const Checkpoint c = load_checkpoint(o->checkpoint);
    std::optional<double> bound;
    if (!o->certificate.empty()) bound = io::read_json(o->certificate).at("max_adversarial_accuracy").get<double>();
    const data::DatasetSplits splits = standardized(o->cache, c);
    Run run("attack", argv, default_out(o->out, o->checkpoint), "attack", o->force);
    run.input(o->checkpoint);
    if (!o->certificate.empty()) run.input(o->certificate);
    run.config = {{"archs", o->archs}, {"seeds", o->seeds}, {"epochs", o->epochs}};

    const Eigen::MatrixXd z_train = train::encode(c.model.pair, splits.train.x, splits.train.a);
    const Eigen::MatrixXd z_test = train::encode(c.model.pair, splits.test.x, splits.test.a);
    certify::AttackOptions opts;
    opts.seeds.clear();
    for (int s = 0; s < o->seeds; ++s) opts.seeds.push_back(static_cast<std::uint64_t>(s));
    opts.fit.epochs = o->epochs;
    data::CsvTable csv{{"arch", "seed", "balanced_accuracy"}, {}};
    Json attacks = Json::array();
    double worst = 0;
    for (std::size_t k = 0; k < hidden.size(); ++k) {
      const certify::AttackResult r = certify::attack_mlp(z_train, splits.train.a, z_test, splits.test.a, hidden[k], opts);
      for (std::size_t s = 0; s < r.seed_accuracy.size(); ++s) {
        csv.rows.push_back({o->archs[k], std::to_string(opts.seeds[s]), format_number(r.seed_accuracy[s])});
      }
      attacks.push_back({{"arch", o->archs[k]},
                         {"seed_accuracy", r.seed_accuracy},
                         {"max_accuracy", r.max_accuracy},
                         {"failures", r.failures}});
      worst = std::max(worst, r.max_accuracy);
      std::printf("%-6s max balanced accuracy %.4f\n", o->archs[k].c_str(), r.max_accuracy);
    }
    Json doc = {{"dataset", c.dataset}, {"gamma", c.gamma}, {"attacks", attacks}, {"max_accuracy", worst}};
    if (bound) {
      doc["certified_bound"] = *bound;
      doc["within_bound"] = worst <= *bound;
      std::printf("certified bound %.4f: %s\n", *bound, worst <= *bound ? "respected" : "VIOLATED");
    }
    run.write_json("attack.json", doc);
    run.write_csv("attack.csv", csv);
    run.finish();
  };
}

Action add_eval(CLI::App& sub) {
  struct Opts {
    std::vector<std::string> checkpoints;
    std::string cache = "cache", out;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--checkpoint", o->checkpoints, "model.json files written by train")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory (default: the first checkpoint's)");
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    Run run("eval", argv, default_out(o->out, o->checkpoints.front()), "eval", o->force);
    run.config = {{"checkpoints", o->checkpoints}};
    data::CsvTable csv{{"dataset", "gamma", "seed", "threshold_kind", "threshold", "accuracy", "balanced_accuracy",
                        "demographic_parity", "equalized_odds", "equal_opportunity"},
                       {}};
    auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    Json results = Json::array();
    for (const std::string& path : o->checkpoints) {
      const Checkpoint c = load_checkpoint(path);
      run.input(path);
      const data::DatasetSplits splits = standardized(o->cache, c);
      const downstream::Classifier& h = c.model.classifier;
      const Eigen::MatrixXd z_val = train::encode(c.model.pair, splits.val.x, splits.val.a);
      const Eigen::MatrixXd z_test = train::encode(c.model.pair, splits.test.x, splits.test.a);
      const double balanced = downstream::balanced_threshold(h.probability(z_val), splits.val.y);
      for (const auto& [kind, t] : {std::pair<std::string, double>{"fixed", 0.5}, {"balanced", balanced}}) {
        const downstream::FairnessMetrics m = downstream::eval_metrics(h, z_test, splits.test.a, splits.test.y, t);
        csv.rows.push_back({c.dataset, format_number(c.gamma), std::to_string(c.seed), kind, format_number(t),
                            format_number(m.accuracy), format_number(m.balanced_accuracy), cell(m.demographic_parity),
                            cell(m.equalized_odds), cell(m.equal_opportunity)});
        results.push_back({{"checkpoint", path},
                           {"dataset", c.dataset},
                           {"gamma", c.gamma},
                           {"seed", c.seed},
                           {"threshold_kind", kind},
                           {"threshold", t},
                           {"accuracy", m.accuracy},
                           {"balanced_accuracy", m.balanced_accuracy},
                           {"demographic_parity", optional_number(m.demographic_parity)},
                           {"odds_gap_y0", optional_number(m.odds_gap[0])},
                           {"odds_gap_y1", optional_number(m.odds_gap[1])},
                           {"equalized_odds", optional_number(m.equalized_odds)},
                           {"equal_opportunity", optional_number(m.equal_opportunity)}});
      }
    }
    run.write_csv("eval.csv", csv);
    run.write_json("eval.json", {{"results", results}});
    run.finish();
    std::cout << "evaluated " << o->checkpoints.size() << " checkpoint(s)\n";
  };
}

Action add_match_discrete(CLI::App& sub) {
  struct Opts {
    std::string dataset, cache = "cache", out, densities;
    double gamma = 1.0, alpha = 1.0;
    std::uint64_t seed = 0;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--dataset", o->dataset, "Cached categorical dataset")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--gamma", o->gamma, "Probability of the fairness-optimal permutation")->capture_default_str();
  sub.add_option("--alpha", o->alpha, "Categorical smoothing when fitting here")->capture_default_str();
  sub.add_option("--densities", o->densities, "Directory with categorical density_a{0,1}.json to use instead");
  sub.add_option("--seed", o->seed, "Seed for the label classifier and the randomized encoding")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory (default runs/<dataset>)");
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (!(o->gamma >= 0 && o->gamma <= 1)) throw UsageError("gamma must lie in [0, 1]");
    if (!(o->alpha > 0)) throw UsageError("--alpha must be positive");
    const data::DatasetSplits splits = load_cached(o->cache, o->dataset);
    if (!splits.train.schema.categorical()) throw UsageError(o->dataset + " has continuous features");
    const std::vector<int> cards = splits.train.schema.cardinalities();
    const std::string tag = "g" + format_number(o->gamma);
    const fs::path out = o->out.empty() ? fs::path("runs") / o->dataset : fs::path(o->out);
    Run run("match-discrete", argv, out, "match-discrete-" + tag, o->force);
    run.seed = o->seed;
    run.input(data::cache_schema_path(o->cache, o->dataset));
    run.input(fs::path(o->cache) / (o->dataset + ".train.csv"));
    run.config = {{"dataset", o->dataset}, {"gamma", o->gamma}, {"alpha", o->alpha}, {"densities", o->densities}};

    std::array<density::AutoregressiveCategorical, 2> models;
    for (int g = 0; g < 2; ++g) {
      if (!o->densities.empty()) {
        const fs::path p = fs::path(o->densities) / ("density_a" + std::to_string(g) + ".json");
        run.input(p);
        models[g] = io::density_from_json(io::read_json(p)).categorical();
      } else {
        models[g] = density::fit_categorical(splits.train.group(g).codes(), cards, {}, o->alpha);
      }
    }

    // Full product domain when it can be enumerated, else every row seen in
    // any split.
    discrete::FiniteDomain domain;
    try {
      domain = discrete::FiniteDomain(cards);
    } catch (const UsageError&) {
      std::vector<std::vector<int>> points;
      for (const auto* ds : {&splits.train, &splits.val, &splits.test}) {
        const Eigen::MatrixXi codes = ds->codes();
        for (Eigen::Index i = 0; i < codes.rows(); ++i) {
          std::vector<int>& p = points.emplace_back(cards.size());
          for (std::size_t j = 0; j < cards.size(); ++j) p[j] = codes(i, static_cast<Eigen::Index>(j));
        }
      }
      domain = discrete::FiniteDomain::from_points(cards, points);
    }
    std::array<discrete::DomainProbabilities, 2> probs;
    for (int g = 0; g < 2; ++g) {
      probs[g] = discrete::domain_probabilities(models[g], domain);
      // Restrict to the enumerated support.
      const double mass = 1.0 - probs[g].remainder;
      for (double& v : probs[g].p) v /= mass;
    }

    const std::vector<int> labels = train::domain_labels(splits.train, domain, o->seed);
    std::vector<int> row(cards.size());
    auto point_of = [&](const Eigen::MatrixXi& codes, Eigen::Index i) {
      for (std::size_t j = 0; j < cards.size(); ++j) row[j] = codes(i, static_cast<Eigen::Index>(j));
      return domain.index_of(row);
    };

    const discrete::DiscreteMatching optimal = discrete::optimal_matching(probs[0].p, probs[1].p);
    const discrete::DiscreteMatching match =
        o->gamma == 1.0 ? optimal
                        : discrete::mix_matchings(optimal, discrete::label_split_matching(probs[0].p, probs[1].p, labels),
                                                  o->gamma);
    const double distance = discrete::discrete_statistical_distance(match, probs[0].p, probs[1].p);
    const certify::CertificationReport cert = certify::certify_exact(distance);

    // Test rows through the encoder; the downstream label of a latent is the
    // predicted label of the domain point it names.
    numerics::Rng rng = numerics::Rng(o->seed).split("match-discrete");
    const Eigen::MatrixXi test_codes = splits.test.codes();
    Eigen::VectorXi pred(test_codes.rows());
    for (Eigen::Index i = 0; i < test_codes.rows(); ++i) {
      const int x = static_cast<int>(point_of(test_codes, i));
      pred[i] = labels[static_cast<std::size_t>(discrete::encode_discrete(match, x, splits.test.a[i], rng).z)];
    }
    const downstream::FairnessMetrics m = downstream::eval_metrics(pred, splits.test.a, splits.test.y);

    run.write_json("matching_" + tag + ".json", io::matching_to_json(match, cards));
    Json doc = report_json(cert);
    doc["dataset"] = o->dataset;
    doc["gamma"] = o->gamma;
    doc["exact_statistical_distance"] = distance;
    doc["domain_size"] = domain.size();
    doc["domain_exhaustive"] = domain.exhaustive();
    doc["remainder_mass"] = {probs[0].remainder, probs[1].remainder};
    doc["test"] = {{"accuracy", m.accuracy},
                   {"balanced_accuracy", m.balanced_accuracy},
                   {"demographic_parity", optional_number(m.demographic_parity)},
                   {"equalized_odds", optional_number(m.equalized_odds)},
                   {"equal_opportunity", optional_number(m.equal_opportunity)}};
    run.write_json("match_" + tag + ".json", doc);
    run.finish();
    std::printf("%s gamma %s: exact statistical distance %.6f, max adversarial accuracy %.6f, test accuracy %.4f\n",
                o->dataset.c_str(), format_number(o->gamma).c_str(), distance, cert.max_adv_acc, m.accuracy);
  };
}

Action add_recourse(CLI::App& sub) {
  struct Opts {
    std::string checkpoint, cache = "cache", out, immutable;
    int steps = 100, limit = 50;
    bool force = false;
  };
  auto o = std::make_shared<Opts>();
  sub.add_option("--checkpoint", o->checkpoint, "model.json written by train")->required();
  sub.add_option("--cache", o->cache, "Dataset cache directory")->capture_default_str();
  sub.add_option("--immutable", o->immutable, "Comma-separated feature names or indices that may not change");
  sub.add_option("--steps", o->steps, "Interpolation steps")->capture_default_str();
  sub.add_option("--limit", o->limit, "Rejected test rows to explain")->capture_default_str();
  sub.add_option("--out", o->out, "Output directory (default: the checkpoint's)");
  sub.add_flag("--force", o->force, "Overwrite an existing manifest");
  return [o](const std::vector<std::string>& argv) {
    if (o->steps < 1 || o->limit < 0) throw UsageError("--steps must be positive and --limit non-negative");
    const Checkpoint c = load_checkpoint(o->checkpoint);
    const data::DatasetSplits splits = standardized(o->cache, c);
    const auto& columns = splits.test.schema.columns;
    downstream::RecourseConfig rc;
    rc.steps = o->steps;
    rc.standardizer = c.model.standardizer;
    for (const std::string& field : data::split_csv_line(o->immutable)) {
      if (field.empty()) continue;
      int index = -1;
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name == field) index = static_cast<int>(j);
      }
      if (index < 0) {
        const std::vector<int> parsed = parse_int_list(field);
        index = parsed.front();
      }
      if (index < 0 || index >= static_cast<int>(columns.size())) throw UsageError("unknown feature '" + field + "'");
      rc.immutable_features.push_back(index);
    }
    Run run("recourse", argv, default_out(o->out, o->checkpoint), "recourse", o->force);
    run.input(o->checkpoint);
    run.config = {{"steps", o->steps}, {"limit", o->limit}, {"immutable", rc.immutable_features}};

    const Eigen::MatrixXd z_train = train::encode(c.model.pair, splits.train.x, splits.train.a);
    const Eigen::MatrixXd z_test = train::encode(c.model.pair, splits.test.x, splits.test.a);
    const Eigen::VectorXi pred = c.model.classifier.predict(z_test);
    Json records = Json::array();
    data::CsvTable csv{{"row", "group", "status", "step", "latent_distance", "raw_l2"}, {}};
    std::map<std::string, int> counts;
    for (Eigen::Index i = 0; i < splits.test.rows() && static_cast<int>(records.size()) < o->limit; ++i) {
      if (pred[i] == 1) continue;
      const int g = splits.test.a[i];
      const downstream::RecourseResult r =
          downstream::recourse(c.model.pair.encoder(g), c.model.classifier, splits.test.x.row(i).transpose(), z_train, rc);
      const std::string status = downstream::to_string(r.status);
      ++counts[status];
      Json changes = Json::object();
      for (Eigen::Index j = 0; j < r.delta_raw.size(); ++j) {
        if (r.delta_raw[j] != 0) changes[columns[static_cast<std::size_t>(j)].name] = r.delta_raw[j];
      }
      records.push_back({{"row", i},
                         {"group", g},
                         {"status", status},
                         {"step", r.step},
                         {"latent_distance", r.latent_distance},
                         {"raw_change", changes}});
      if (!r.reason.empty()) records.back()["reason"] = r.reason;
      csv.rows.push_back({std::to_string(i), std::to_string(g), status, std::to_string(r.step),
                          format_number(r.latent_distance),
                          r.delta_raw.size() ? format_number(r.delta_raw.norm()) : std::string()});
    }
    run.write_json("recourse.json", {{"dataset", c.dataset}, {"gamma", c.gamma}, {"summary", counts}, {"records", records}});
    run.write_csv("recourse.csv", csv);
    run.finish();
    for (const auto& [status, n] : counts) std::printf("%-16s %d\n", status.c_str(), n);
  };
}

}  // namespace fnf::cli
