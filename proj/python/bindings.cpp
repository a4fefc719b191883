#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fnf/certify/attack.hpp"
#include "fnf/certify/certify.hpp"
#include "fnf/data/loaders.hpp"
#include "fnf/data/synthetic.hpp"
#include "fnf/discrete/matching.hpp"
#include "fnf/downstream/metrics.hpp"
#include "fnf/errors.hpp"
#include "fnf/io/model_io.hpp"
#include "fnf/train/pipeline.hpp"

namespace py = pybind11;
using namespace fnf;

namespace {

py::object optional(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::none(); }

py::dict report_dict(const certify::CertificationReport& r) {
  py::dict d;
  d["delta_hat"] = r.delta_hat;
  d["n"] = r.n;
  d["epsilon"] = r.epsilon;
  d["delta"] = r.delta;
  d["max_adversarial_accuracy"] = r.max_adv_acc;
  d["demographic_parity_bound"] = r.demographic_parity_bound;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fair normalizing flows";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<MissingInputError>(m, "MissingInputError", PyExc_FileNotFoundError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<data::TabularDataset>(m, "Dataset")
      .def_readonly("name", &data::TabularDataset::name)
      .def_readonly("split", &data::TabularDataset::split)
      .def_readonly("x", &data::TabularDataset::x)
      .def_readonly("a", &data::TabularDataset::a)
      .def_readonly("y", &data::TabularDataset::y)
      .def_property_readonly("rows", &data::TabularDataset::rows)
      .def_property_readonly("features", &data::TabularDataset::features)
      .def_property_readonly("columns", [](const data::TabularDataset& d) {
        std::vector<std::string> names;
        for (const auto& c : d.schema.columns) names.push_back(c.name);
        return names;
      });

  m.def("make_synthetic", &data::make_synthetic, py::arg("n_per_group"), py::arg("seed"),
        "Two-group, two-mixture dataset; group 0 rows first.");
  m.def(
      "load_dataset",
      [](const std::string& name, const std::string& root, std::uint64_t seed) {
        data::LoadConfig c = data::default_load_config();
        if (!root.empty()) c.root = root;
        c.seed = seed;
        data::DatasetSplits s = data::load_dataset(name, c);
        py::dict d;
        d["train"] = std::move(s.train);
        d["val"] = std::move(s.val);
        d["test"] = std::move(s.test);
        return d;
      },
      py::arg("name"), py::arg("root") = "", py::arg("seed") = 0,
      "Train/val/test splits of adult, compas, crime, law or synthetic.");

  py::class_<density::GaussianMixture>(m, "GaussianMixture")
      .def_property_readonly("components", &density::GaussianMixture::components)
      .def_property_readonly("dim", &density::GaussianMixture::dim)
      .def_property_readonly("weights", &density::GaussianMixture::weights)
      .def_property_readonly("means", &density::GaussianMixture::means)
      .def(
          "log_density", [](const density::GaussianMixture& g, const Eigen::MatrixXd& x) { return g.log_density_batch(x); },
          py::arg("x"))
      .def(
          "sample",
          [](const density::GaussianMixture& g, Eigen::Index n, std::uint64_t seed) {
            numerics::Rng rng(seed);
            return g.sample(n, rng);
          },
          py::arg("n"), py::arg("seed") = 0);
  m.def(
      "fit_gmm",
      [](const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
        numerics::Rng rng(seed);
        return density::fit_gmm(x, k, rng).model;
      },
      py::arg("x"), py::arg("components"), py::arg("seed") = 0, "EM with k-means++ seeding and restarts.");

  py::class_<train::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &train::TrainConfig::gamma)
      .def_readwrite("gamma_warmup_epochs", &train::TrainConfig::gamma_warmup_epochs)
      .def_readwrite("epochs", &train::TrainConfig::epochs)
      .def_readwrite("batch_size", &train::TrainConfig::batch_size)
      .def_readwrite("steps_per_epoch", &train::TrainConfig::steps_per_epoch)
      .def_readwrite("lr", &train::TrainConfig::lr)
      .def_readwrite("weight_decay", &train::TrainConfig::weight_decay)
      .def_readwrite("cosine", &train::TrainConfig::cosine)
      .def_readwrite("seed", &train::TrainConfig::seed)
      .def_readwrite("restarts", &train::TrainConfig::restarts)
      .def_readwrite("classifier_hidden", &train::TrainConfig::classifier_hidden)
      .def_property(
          "blocks", [](const train::TrainConfig& c) { return c.flow.blocks; },
          [](train::TrainConfig& c, int b) { c.flow.blocks = b; })
      .def_property(
          "hidden", [](const train::TrainConfig& c) { return c.flow.hidden; },
          [](train::TrainConfig& c, std::vector<int> h) { c.flow.hidden = std::move(h); })
      .def_property(
          "init_gain", [](const train::TrainConfig& c) { return c.flow.init_gain; },
          [](train::TrainConfig& c, double g) { c.flow.init_gain = g; });

  py::class_<train::Checkpoint>(m, "Checkpoint")
      .def_readonly("epoch", &train::Checkpoint::epoch)
      .def(
          "encode", [](const train::Checkpoint& c, const Eigen::MatrixXd& x, const Eigen::VectorXi& a) {
            return train::encode(c.pair, x, a);
          },
          py::arg("x"), py::arg("a"))
      .def(
          "decode",
          [](const train::Checkpoint& c, const Eigen::MatrixXd& z, int group) {
            return c.pair.encoder(group).inverse(z).value;
          },
          py::arg("z"), py::arg("group"))
      .def(
          "predict_proba", [](const train::Checkpoint& c, const Eigen::MatrixXd& z) { return c.classifier.probability(z); },
          py::arg("z"))
      .def(
          "predict",
          [](const train::Checkpoint& c, const Eigen::MatrixXd& z, double t) { return c.classifier.predict(z, t); },
          py::arg("z"), py::arg("threshold") = 0.5)
      .def(
          "to_json",
          [](const train::Checkpoint& c) {
            io::FnfModel model{flow::Standardizer::identity(c.pair.f0.dim()), c.pair, c.classifier, c.epoch, {}};
            return io::fnf_model_to_json(model).dump(2);
          },
          "Model file contents (identity standardization).");

  m.def(
      "train_fnf",
      [](const train::TrainConfig& config, const density::GaussianMixture& p0, const density::GaussianMixture& p1,
         const data::TabularDataset& train_rows, const data::TabularDataset& val_rows) {
        train::FnfResult r;
        {
          py::gil_scoped_release release;
          r = train::train_fnf(config, p0, p1, train_rows, val_rows);
        }
        py::list trace;
        for (const auto& e : r.trace.epochs) {
          py::dict d;
          d["l0"] = e.l0;
          d["l1"] = e.l1;
          d["clf"] = e.clf;
          d["joint"] = e.joint;
          d["val_delta"] = e.val_delta;
          d["val_accuracy"] = e.val_accuracy;
          d["val_joint"] = e.val_joint;
          trace.append(d);
        }
        py::dict out;
        out["best"] = r.best;
        out["final"] = r.final;
        out["trace"] = trace;
        out["restart"] = r.restart;
        return out;
      },
      py::arg("config"), py::arg("p0"), py::arg("p1"), py::arg("train"), py::arg("val"),
      "Joint training of both flow encoders and the classifier.");

  m.def(
      "certify",
      [](const train::Checkpoint& c, const density::GaussianMixture& p0, const density::GaussianMixture& p1,
         std::int64_t n, double delta, std::uint64_t seed) {
        const density::DensityModel d0(p0, {}), d1(p1, {});
        const certify::OptimalAdversary adv(c.pair, d0, d1);
        numerics::Rng rng(seed);
        return report_dict(certify::certify(adv, n, delta, rng));
      },
      py::arg("checkpoint"), py::arg("p0"), py::arg("p1"), py::arg("n") = 100000, py::arg("delta") = 0.05,
      py::arg("seed") = 0, "Statistical distance estimate and the implied bound on adversarial accuracy.");
  m.def("hoeffding_epsilon", &certify::hoeffding_epsilon, py::arg("n"), py::arg("delta"));
  m.def("required_samples", &certify::required_samples, py::arg("epsilon"), py::arg("delta"));

  m.def(
      "attack_mlp",
      [](const Eigen::MatrixXd& z_train, const Eigen::VectorXi& a_train, const Eigen::MatrixXd& z_test,
         const Eigen::VectorXi& a_test, const std::vector<int>& hidden, const std::vector<std::uint64_t>& seeds,
         int epochs) {
        certify::AttackOptions opts;
        opts.seeds = seeds;
        opts.fit.epochs = epochs;
        const certify::AttackResult r = certify::attack_mlp(z_train, a_train, z_test, a_test, hidden, opts);
        py::dict d;
        d["seed_accuracy"] = r.seed_accuracy;
        d["max_accuracy"] = r.max_accuracy;
        d["failures"] = r.failures;
        return d;
      },
      py::arg("z_train"), py::arg("a_train"), py::arg("z_test"), py::arg("a_test"),
      py::arg("hidden") = std::vector<int>{50, 50}, py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2, 3, 4},
      py::arg("epochs") = 30, "Balanced accuracy of MLP adversaries predicting a from z.");

  m.def(
      "eval_metrics",
      [](const Eigen::VectorXi& pred, const Eigen::VectorXi& a, const Eigen::VectorXd& y) {
        const downstream::FairnessMetrics r = downstream::eval_metrics(pred, a, y);
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["balanced_accuracy"] = r.balanced_accuracy;
        d["demographic_parity"] = optional(r.demographic_parity);
        d["equalized_odds"] = optional(r.equalized_odds);
        d["equal_opportunity"] = optional(r.equal_opportunity);
        return d;
      },
      py::arg("predicted"), py::arg("a"), py::arg("y"));

  m.def(
      "optimal_matching",
      [](const std::vector<double>& p0, const std::vector<double>& p1) {
        return discrete::optimal_matching(p0, p1).optimal;
      },
      py::arg("p0"), py::arg("p1"), "Latent index of each group-1 point under the sorted matching.");
  m.def(
      "discrete_statistical_distance",
      [](const std::vector<int>& perm, const std::vector<double>& p0, const std::vector<double>& p1) {
        discrete::DiscreteMatching match;
        match.optimal = perm;
        return discrete::discrete_statistical_distance(match, p0, p1);
      },
      py::arg("matching"), py::arg("p0"), py::arg("p1"));

  m.def(
      "run_synthetic_fnf",
      [](std::uint64_t seed, std::optional<int> epochs, std::optional<int> restarts, Eigen::Index n_per_group) {
        train::SyntheticExperimentConfig c = train::synthetic_experiment_defaults();
        if (epochs) c.fnf.epochs = *epochs;
        if (restarts) c.fnf.restarts = *restarts;
        c.n_per_group = n_per_group;
        train::SyntheticOutcome r;
        {
          py::gil_scoped_release release;
          r = train::run_synthetic_fnf(c, seed);
        }
        py::dict d;
        d["recovery"] = r.recovery;
        d["attack_accuracy"] = r.attack_accuracy;
        d["task_accuracy"] = r.task_accuracy;
        d["val_delta"] = r.val_delta;
        d["restart"] = r.restart;
        return d;
      },
      py::arg("seed") = 0, py::arg("epochs") = py::none(), py::arg("restarts") = py::none(),
      py::arg("n_per_group") = 4000, "The two-mixture experiment end to end.");
}
