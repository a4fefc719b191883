#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fnf/data/dataset.hpp"

namespace fnf::data {

enum class Variant {
  kPreprocessed,  // reduced columns, Adult/Compas discretized
  kOriginal,      // all usable columns, used by the preprocessing sanity check
};

struct LoadConfig {
  std::filesystem::path root;        // holds <dataset>/<raw files>
  std::filesystem::path schema_dir;  // holds <dataset>.json manifests
  std::uint64_t seed = 0;
  int compas_bins = 5;
  Variant variant = Variant::kPreprocessed;
  Eigen::Index synthetic_train_per_group = 5000;
  Eigen::Index synthetic_test_per_group = 5000;
};

// FNF_DATA_ROOT if set, otherwise ./data.
std::filesystem::path default_data_root();
// FNF_SCHEMA_DIR if set, otherwise the schemas/ directory of the source tree.
std::filesystem::path default_schema_dir();
LoadConfig default_load_config();

// Row indices into the cleaned source table. Adult's test indices refer to
// its separate test file.
struct SplitIndices {
  std::vector<Eigen::Index> train, val, test;
  std::uint64_t hash() const;
};

struct DatasetSplits {
  TabularDataset train, val, test;
  SplitIndices indices;
};

const std::vector<std::string>& dataset_names();

DatasetSplits load_dataset(const std::string& name, const LoadConfig& config);

// Seeded split: floor(0.8 n) rows for training, the rest held out.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_rows(Eigen::Index n, std::uint64_t seed,
                                                                          std::string_view purpose);

// Interior edges of (at most) `bins` quantile bins; duplicate edges are
// merged, so heavily tied columns get fewer bins.
std::vector<double> quantile_edges(std::span<const double> values, int bins);
// Code k means edges[k-1] <= v < edges[k].
int bin_code(const std::vector<double>& edges, double v);
std::pair<double, double> bin_interval(const std::vector<double>& edges, int code);

}  // namespace fnf::data
