#include "fnf/data/cache.hpp"

#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fnf/data/csv.hpp"
#include "fnf/errors.hpp"

namespace fnf::data {

namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError(path.string() + ": bad value '" + s + "'");
  return v;
}

std::filesystem::path split_path(const std::filesystem::path& dir, const std::string& name, const std::string& split) {
  return dir / (name + "." + split + ".csv");
}

json column_json(const Column& c) {
  return {{"name", c.name},
          {"type", c.type == ColumnType::kCategorical ? "categorical" : "continuous"},
          {"categories", c.categories},
          {"bin_edges", c.bin_edges}};
}

Column column_from_json(const json& j) {
  Column c;
  c.name = j.at("name").get<std::string>();
  const auto type = j.at("type").get<std::string>();
  if (type != "categorical" && type != "continuous") throw SchemaError("unknown column type " + type);
  c.type = type == "categorical" ? ColumnType::kCategorical : ColumnType::kContinuous;
  c.categories = j.at("categories").get<std::vector<std::string>>();
  c.bin_edges = j.at("bin_edges").get<std::vector<double>>();
  return c;
}

void write_split(const std::filesystem::path& path, const TabularDataset& ds) {
  CsvTable t;
  for (const auto& c : ds.schema.columns) t.header.push_back(c.name);
  if (t.header.empty()) {
    for (int j = 0; j < ds.features(); ++j) t.header.push_back("x" + std::to_string(j + 1));
  }
  t.header.push_back("a");
  t.header.push_back("y");
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) row.push_back(shortest(ds.x(i, j)));
    row.push_back(std::to_string(ds.a[i]));
    row.push_back(shortest(ds.y[i]));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

TabularDataset read_split(const std::filesystem::path& path, const std::string& name, const std::string& split,
                          const Schema& schema) {
  if (!std::filesystem::exists(path)) throw MissingInputError("missing dataset cache " + path.string());
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header[t.header.size() - 2] != "a" || t.header.back() != "y") {
    throw SchemaError(path.string() + ": last two columns must be a and y");
  }
  const auto d = static_cast<Eigen::Index>(t.header.size() - 2);
  TabularDataset ds;
  ds.name = name;
  ds.split = split;
  ds.schema = schema;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  ds.x.resize(n, d);
  ds.a.resize(n);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) ds.x(i, j) = parse_double(row[static_cast<std::size_t>(j)], path);
    ds.a[i] = static_cast<int>(parse_double(row[static_cast<std::size_t>(d)], path));
    ds.y[i] = parse_double(row[static_cast<std::size_t>(d + 1)], path);
  }
  ds.validate();
  return ds;
}

}  // namespace

std::filesystem::path cache_schema_path(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + ".schema.json");
}

void save_cache(const std::filesystem::path& dir, const DatasetSplits& splits, const CacheInfo& info) {
  std::filesystem::create_directories(dir);
  const std::string& name = splits.train.name;
  json columns = json::array();
  for (const auto& c : splits.train.schema.columns) columns.push_back(column_json(c));
  json j = {{"format_version", kFormatVersion},
            {"dataset", name},
            {"seed", info.seed},
            {"variant", info.variant},
            {"sensitive", splits.train.schema.sensitive},
            {"label", splits.train.schema.label},
            {"columns", columns},
            {"split_hash", splits.indices.hash()},
            {"rows", {{"train", splits.train.rows()}, {"val", splits.val.rows()}, {"test", splits.test.rows()}}}};
  write_split(split_path(dir, name, "train"), splits.train);
  write_split(split_path(dir, name, "val"), splits.val);
  write_split(split_path(dir, name, "test"), splits.test);
  std::ofstream out(cache_schema_path(dir, name));
  if (!out) throw Error("cannot write " + cache_schema_path(dir, name).string());
  out << j.dump(2) << '\n';
}

DatasetSplits load_cache(const std::filesystem::path& dir, const std::string& name) {
  const auto schema_path = cache_schema_path(dir, name);
  std::ifstream in(schema_path);
  if (!in) throw MissingInputError("missing dataset cache " + schema_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(schema_path.string() + ": " + e.what());
  }
  if (j.value("format_version", 0) != kFormatVersion) throw SchemaError(schema_path.string() + ": unsupported format");
  Schema schema;
  for (const auto& c : j.at("columns")) schema.columns.push_back(column_from_json(c));
  schema.sensitive = j.value("sensitive", "");
  schema.label = j.value("label", "");
  DatasetSplits out;
  out.train = read_split(split_path(dir, name, "train"), name, "train", schema);
  out.val = read_split(split_path(dir, name, "val"), name, "val", schema);
  out.test = read_split(split_path(dir, name, "test"), name, "test", schema);
  for (const auto* ds : {&out.train, &out.val, &out.test}) {
    if (j.at("rows").at(ds->split).get<Eigen::Index>() != ds->rows()) {
      throw SchemaError(schema_path.string() + ": row count of " + ds->split + " split disagrees with the sidecar");
    }
  }
  return out;
}

}  // namespace fnf::data
