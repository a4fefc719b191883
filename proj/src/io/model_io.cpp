#include "fnf/io/model_io.hpp"

#include <algorithm>
#include <fstream>

#include "fnf/errors.hpp"

namespace fnf::io {

namespace {

Json header(const std::string& tag) { return {{"format_version", kModelFormatVersion}, {"tag", tag}}; }

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

template <class V>
std::vector<double> to_vector(const V& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::RowVectorXd row_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void expect_tag(const Json& j, const std::string& tag) {
  if (!j.is_object() || !j.contains("format_version")) throw SchemaError("model file lacks format_version");
  if (j.at("format_version").get<int>() != kModelFormatVersion) {
    throw SchemaError("unsupported model format_version " + j.at("format_version").dump());
  }
  if (j.value("tag", "") != tag) throw SchemaError("expected a '" + tag + "' model, found '" + j.value("tag", "") + "'");
}

Json params_to_json(const numerics::ParamVector& params) {
  Json segs = Json::array();
  const auto values = params.values();
  for (const auto& s : params.segments()) {
    segs.push_back({{"name", s.name},
                    {"rows", s.rows},
                    {"cols", s.cols},
                    {"values", std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(s.offset),
                                                   values.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size()))}});
  }
  return segs;
}

void params_from_json(const Json& j, numerics::ParamVector& params) {
  const auto& segs = params.segments();
  if (j.size() != segs.size()) {
    throw SchemaError("model has " + std::to_string(j.size()) + " parameter segments, expected " +
                      std::to_string(segs.size()));
  }
  std::vector<double> flat(params.size());
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Json& s = j.at(k);
    const auto name = s.at("name").get<std::string>();
    if (name != segs[k].name || s.at("rows").get<Eigen::Index>() != segs[k].rows ||
        s.at("cols").get<Eigen::Index>() != segs[k].cols) {
      throw SchemaError("parameter segment " + name + " does not match the expected layout (" + segs[k].name + ")");
    }
    const auto values = s.at("values").get<std::vector<double>>();
    if (values.size() != segs[k].size()) throw SchemaError("segment " + name + " has the wrong number of values");
    std::copy(values.begin(), values.end(), flat.begin() + static_cast<std::ptrdiff_t>(segs[k].offset));
  }
  params.assign(flat);
}

Json standardizer_to_json(const flow::Standardizer& s) {
  return {{"mean", to_vector(s.mean)}, {"scale", to_vector(s.scale)}};
}

flow::Standardizer standardizer_from_json(const Json& j) {
  flow::Standardizer s{row_from(j.at("mean").get<std::vector<double>>()),
                       row_from(j.at("scale").get<std::vector<double>>())};
  if (s.mean.size() != s.scale.size()) throw SchemaError("standardizer mean and scale differ in length");
  if ((s.scale.array() <= 0).any()) throw SchemaError("standardizer scale must be positive");
  return s;
}

Json flow_to_json(const flow::FlowEncoder& f) {
  Json j = header("flow");
  const auto& c = f.config();
  Json masks = Json::array();
  for (const auto& layer : f.layers()) masks.push_back(layer.parity());
  j["group"] = f.group();
  j["dim"] = c.dim;
  j["blocks"] = c.blocks;
  j["hidden"] = c.hidden;
  j["activation"] = numerics::to_string(c.activation);
  j["scale_clamp"] = c.scale_clamp;
  j["mask_parity"] = masks;
  j["segments"] = params_to_json(f.params());
  return j;
}

flow::FlowEncoder flow_from_json(const Json& j) {
  expect_tag(j, "flow");
  flow::FlowConfig c;
  c.dim = j.at("dim").get<int>();
  c.blocks = j.at("blocks").get<int>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.activation = numerics::activation_from_string(j.at("activation").get<std::string>());
  c.scale_clamp = j.at("scale_clamp").get<double>();
  flow::FlowEncoder f(c, j.at("group").get<int>());
  const auto masks = j.at("mask_parity").get<std::vector<int>>();
  if (masks.size() != f.layers().size()) throw SchemaError("flow mask list has the wrong length");
  for (std::size_t l = 0; l < masks.size(); ++l) {
    if (masks[l] != f.layers()[l].parity()) throw SchemaError("flow masks must alternate starting at parity 0");
  }
  params_from_json(j.at("segments"), f.params());
  return f;
}

Json classifier_to_json(const downstream::Classifier& h) {
  Json j = header("classifier");
  j["input_dim"] = h.input_dim();
  j["hidden"] = h.mlp().hidden();
  j["activation"] = numerics::to_string(h.mlp().activation());
  j["segments"] = params_to_json(h.params());
  return j;
}

downstream::Classifier classifier_from_json(const Json& j) {
  expect_tag(j, "classifier");
  downstream::Classifier h(j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(),
                           numerics::activation_from_string(j.at("activation").get<std::string>()));
  params_from_json(j.at("segments"), h.params());
  return h;
}

Json density_to_json(const density::DensityModel& m) {
  Json j = header("density");
  const auto& meta = m.metadata();
  j["group"] = meta.group;
  j["sample_count"] = meta.sample_count;
  j["fit_log_likelihood"] = std::isfinite(meta.fit_log_likelihood) ? Json(meta.fit_log_likelihood) : Json(nullptr);
  j["floored_events"] = meta.floored_events;
  if (m.is_gmm()) {
    const auto& g = m.gmm();
    j["kind"] = "gmm";
    j["weights"] = to_vector(g.weights());
    j["means"] = matrix_to_json(g.means());
    Json covs = Json::array();
    for (const auto& c : g.covariances()) covs.push_back(matrix_to_json(c));
    j["covariances"] = covs;
  } else if (m.is_categorical()) {
    const auto& c = m.categorical();
    j["kind"] = "categorical";
    j["cardinalities"] = c.cardinalities();
    j["order"] = c.order();
    j["alpha"] = c.alpha();
    Json tables = Json::array();
    for (std::size_t p = 0; p < c.counts().size(); ++p) {
      // Sorted by prefix code so the file does not depend on hash order.
      std::vector<std::pair<std::uint64_t, const std::vector<double>*>> entries;
      for (const auto& [prefix, counts] : c.counts()[p]) entries.emplace_back(prefix, &counts);
      std::sort(entries.begin(), entries.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
      Json table = Json::array();
      for (const auto& [prefix, counts] : entries) table.push_back({{"prefix", prefix}, {"counts", *counts}});
      tables.push_back(std::move(table));
    }
    j["counts"] = tables;
  } else {
    throw UsageError("cannot serialize an empty density model");
  }
  return j;
}

density::DensityModel density_from_json(const Json& j) {
  expect_tag(j, "density");
  density::DensityMetadata meta;
  meta.group = j.value("group", -1);
  meta.sample_count = j.value("sample_count", std::size_t{0});
  if (j.contains("fit_log_likelihood") && !j.at("fit_log_likelihood").is_null()) {
    meta.fit_log_likelihood = j.at("fit_log_likelihood").get<double>();
  }
  meta.floored_events = j.value("floored_events", 0);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gmm") {
    const auto w = j.at("weights").get<std::vector<double>>();
    std::vector<Eigen::MatrixXd> covs;
    for (const auto& c : j.at("covariances")) covs.push_back(matrix_from_json(c));
    return density::DensityModel(
        density::GaussianMixture(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                                 matrix_from_json(j.at("means")), std::move(covs)),
        meta);
  }
  if (kind == "categorical") {
    density::AutoregressiveCategorical c(j.at("cardinalities").get<std::vector<int>>(),
                                         j.at("order").get<std::vector<int>>(), j.at("alpha").get<double>());
    const Json& tables = j.at("counts");
    if (tables.size() != static_cast<std::size_t>(c.dim())) throw SchemaError("categorical count tables mismatch");
    for (std::size_t p = 0; p < tables.size(); ++p) {
      for (const auto& e : tables.at(p)) {
        c.set_counts(p, e.at("prefix").get<std::uint64_t>(), e.at("counts").get<std::vector<double>>());
      }
    }
    return density::DensityModel(std::move(c), meta);
  }
  throw SchemaError("unknown density kind '" + kind + "'");
}

Json matching_to_json(const discrete::DiscreteMatching& m, const std::vector<int>& cardinalities) {
  Json j = header("matching");
  j["cardinalities"] = cardinalities;
  j["gamma"] = m.gamma;
  j["optimal"] = m.optimal;
  j["label_split"] = m.label_split;
  j["fallback_classes"] = m.fallback_classes;
  return j;
}

discrete::DiscreteMatching matching_from_json(const Json& j, std::vector<int>* cardinalities) {
  expect_tag(j, "matching");
  discrete::DiscreteMatching m;
  m.gamma = j.at("gamma").get<double>();
  m.optimal = j.at("optimal").get<std::vector<int>>();
  m.label_split = j.at("label_split").get<std::vector<int>>();
  m.fallback_classes = j.value("fallback_classes", std::vector<int>{});
  if (!(m.gamma >= 0 && m.gamma <= 1)) throw SchemaError("matching gamma outside [0, 1]");
  auto is_permutation = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != static_cast<int>(i)) return false;
    }
    return true;
  };
  if (!is_permutation(m.optimal) || (!m.label_split.empty() && (m.label_split.size() != m.optimal.size() ||
                                                                 !is_permutation(m.label_split)))) {
    throw SchemaError("matching arrays must be permutations of the domain indices");
  }
  if (cardinalities) *cardinalities = j.at("cardinalities").get<std::vector<int>>();
  return m;
}

Json fnf_model_to_json(const FnfModel& m) {
  Json j = header("fnf_model");
  j["epoch"] = m.epoch;
  j["info"] = m.info;
  j["standardization"] = standardizer_to_json(m.standardizer);
  j["flows"] = {flow_to_json(m.pair.f0), flow_to_json(m.pair.f1)};
  j["classifier"] = classifier_to_json(m.classifier);
  return j;
}

FnfModel fnf_model_from_json(const Json& j) {
  expect_tag(j, "fnf_model");
  FnfModel m;
  m.epoch = j.value("epoch", -1);
  m.info = j.value("info", Json::object());
  m.standardizer = standardizer_from_json(j.at("standardization"));
  const Json& flows = j.at("flows");
  if (flows.size() != 2) throw SchemaError("fnf model needs two flows");
  m.pair.f0 = flow_from_json(flows.at(0));
  m.pair.f1 = flow_from_json(flows.at(1));
  if (m.pair.f0.group() != 0 || m.pair.f1.group() != 1) throw SchemaError("flows must be stored as group 0, group 1");
  m.classifier = classifier_from_json(j.at("classifier"));
  const int d = m.pair.f0.dim();
  if (m.pair.f1.dim() != d || m.standardizer.dim() != d || m.classifier.input_dim() != d) {
    throw SchemaError("fnf model components disagree on the feature dimension");
  }
  return m;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing input file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace fnf::io
