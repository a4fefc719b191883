#pragma once

#include <filesystem>
#include <string>

#include "fnf/data/loaders.hpp"

namespace fnf::data {

// Canonical dataset cache. For each split, <dir>/<name>.<split>.csv holds one
// row per example: the feature columns in schema order, then a and y, with a
// header row. Values use the shortest round-trip decimal form. The sidecar
// <dir>/<name>.schema.json records the column schema, split sizes, the split
// hash and the load seed.
struct CacheInfo {
  std::uint64_t seed = 0;
  std::string variant = "preprocessed";
};

void save_cache(const std::filesystem::path& dir, const DatasetSplits& splits, const CacheInfo& info = {});

// Throws MissingInputError naming the first absent file.
DatasetSplits load_cache(const std::filesystem::path& dir, const std::string& name);

std::filesystem::path cache_schema_path(const std::filesystem::path& dir, const std::string& name);

}  // namespace fnf::data
