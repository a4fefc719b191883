#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fnf/density/model.hpp"
#include "fnf/discrete/matching.hpp"
#include "fnf/downstream/classifier.hpp"
#include "fnf/flow/encoder.hpp"

namespace fnf::io {

// Model files are single JSON documents:
//   {"format_version": 1, "tag": "<kind>", ...}
// Parameter vectors are stored as a list of named segments, each with its
// shape and a flat column-major value array. Readers reject other versions.
inline constexpr int kModelFormatVersion = 1;

using Json = nlohmann::json;

Json params_to_json(const numerics::ParamVector& params);
// Loads values into a vector with an identical segment layout.
void params_from_json(const Json& j, numerics::ParamVector& params);

Json standardizer_to_json(const flow::Standardizer& s);
flow::Standardizer standardizer_from_json(const Json& j);

// tag "flow"
Json flow_to_json(const flow::FlowEncoder& f);
flow::FlowEncoder flow_from_json(const Json& j);

// tag "classifier"
Json classifier_to_json(const downstream::Classifier& h);
downstream::Classifier classifier_from_json(const Json& j);

// tag "density"; kind "gmm" or "categorical"
Json density_to_json(const density::DensityModel& m);
density::DensityModel density_from_json(const Json& j);

// tag "matching"
Json matching_to_json(const discrete::DiscreteMatching& m, const std::vector<int>& cardinalities);
discrete::DiscreteMatching matching_from_json(const Json& j, std::vector<int>* cardinalities = nullptr);

// A trained representation with its downstream classifier. tag "fnf_model".
struct FnfModel {
  flow::Standardizer standardizer;
  flow::FlowEncoderPair pair;
  downstream::Classifier classifier;
  int epoch = -1;
  Json info = Json::object();  // dataset, gamma, seed, ...
};

Json fnf_model_to_json(const FnfModel& m);
FnfModel fnf_model_from_json(const Json& j);

// Pretty-printed with a trailing newline; identical inputs give identical
// bytes. Throws MissingInputError when reading an absent file.
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);
// Checks format_version and tag; throws SchemaError otherwise.
void expect_tag(const Json& j, const std::string& tag);

}  // namespace fnf::io
