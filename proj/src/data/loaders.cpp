#include "fnf/data/loaders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fnf/data/csv.hpp"
#include "fnf/data/synthetic.hpp"
#include "fnf/errors.hpp"
#include "fnf/numerics/rng.hpp"

#ifndef FNF_SCHEMA_DIR
#define FNF_SCHEMA_DIR "schemas"
#endif

namespace fnf::data {

std::filesystem::path default_data_root() {
  if (const char* env = std::getenv("FNF_DATA_ROOT"); env && *env) return env;
  return "data";
}

std::filesystem::path default_schema_dir() {
  if (const char* env = std::getenv("FNF_SCHEMA_DIR"); env && *env) return env;
  return FNF_SCHEMA_DIR;
}

LoadConfig default_load_config() {
  LoadConfig c;
  c.root = default_data_root();
  c.schema_dir = default_schema_dir();
  return c;
}

std::uint64_t SplitIndices::hash() const {
  // FNV-1a over the three lists, separated by a marker.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const auto* list : {&train, &val, &test}) {
    for (Eigen::Index i : *list) mix(static_cast<std::uint64_t>(i));
    mix(~0ull);
  }
  return h;
}

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"adult", "compas", "crime", "law", "synthetic"};
  return names;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_rows(Eigen::Index n, std::uint64_t seed,
                                                                          std::string_view purpose) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  numerics::Rng rng = numerics::Rng(seed).split(purpose);
  rng.shuffle(order.begin(), order.end());
  const auto head = static_cast<std::ptrdiff_t>(std::floor(0.8 * static_cast<double>(n)));
  std::vector<Eigen::Index> first(order.begin(), order.begin() + head), rest(order.begin() + head, order.end());
  std::sort(first.begin(), first.end());
  std::sort(rest.begin(), rest.end());
  return {first, rest};
}

std::vector<double> quantile_edges(std::span<const double> values, int bins) {
  if (bins < 1) throw UsageError("bin count must be positive");
  if (values.empty()) throw UsageError("cannot bin an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    // Lower empirical quantile; values equal to an edge fall in the upper bin.
    const auto idx = static_cast<std::size_t>(std::ceil(k * static_cast<double>(sorted.size()) / bins)) - 1;
    const double e = sorted[std::min(idx + 1, sorted.size() - 1)];
    if (e > sorted.front() && (edges.empty() || e > edges.back())) edges.push_back(e);
  }
  return edges;
}

int bin_code(const std::vector<double>& edges, double v) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

std::pair<double, double> bin_interval(const std::vector<double>& edges, int code) {
  if (code < 0 || code > static_cast<int>(edges.size())) throw UsageError("bin code out of range");
  const double inf = std::numeric_limits<double>::infinity();
  return {code == 0 ? -inf : edges[static_cast<std::size_t>(code - 1)],
          code == static_cast<int>(edges.size()) ? inf : edges[static_cast<std::size_t>(code)]};
}

namespace {

using json = nlohmann::json;

struct Manifest {
  std::string dataset;
  std::map<std::string, std::string> files;
  bool header = true;
  std::map<std::string, int> skip_lines;
  std::set<std::string> missing;
  std::vector<std::string> columns;
  std::vector<std::string> optional;
  std::map<std::string, std::string> aliases;  // accepted name -> canonical name
  // Drop rows with a missing value in any column, not only in the used ones.
  bool drop_incomplete_rows = false;
};

Manifest read_manifest(const std::filesystem::path& dir, const std::string& name) {
  const auto path = dir / (name + ".json");
  std::ifstream in(path);
  if (!in) throw MissingInputError("missing schema manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  Manifest m;
  m.dataset = j.at("dataset").get<std::string>();
  m.files = j.at("files").get<std::map<std::string, std::string>>();
  m.header = j.value("header", true);
  m.skip_lines = j.value("skip_lines", std::map<std::string, int>{});
  const auto missing = j.value("missing", std::vector<std::string>{});
  m.missing = {missing.begin(), missing.end()};
  m.columns = j.at("columns").get<std::vector<std::string>>();
  m.optional = j.value("optional_columns", std::vector<std::string>{});
  m.aliases = j.value("aliases", std::map<std::string, std::string>{});
  m.drop_incomplete_rows = j.value("drop_incomplete_rows", false);
  return m;
}

// Reads one raw file and checks it against the manifest.
CsvTable read_source(const LoadConfig& config, const Manifest& m, const std::string& part) {
  const auto it = m.files.find(part);
  if (it == m.files.end()) throw SchemaError(m.dataset + " manifest has no '" + part + "' file");
  const auto path = config.root / m.dataset / it->second;
  if (!std::filesystem::exists(path)) throw MissingInputError("missing raw data file " + path.string());
  CsvOptions opt;
  opt.header = m.header;
  opt.skip_lines = m.skip_lines.contains(part) ? m.skip_lines.at(part) : 0;
  CsvTable t = read_csv(path, opt);
  if (!m.header) {
    const std::size_t width = t.rows.empty() ? 0 : t.rows.front().size();
    if (width != m.columns.size()) {
      throw SchemaError(path.string() + ": expected " + std::to_string(m.columns.size()) + " columns, found " +
                        std::to_string(width));
    }
    t.header = m.columns;
    return t;
  }
  for (auto& h : t.header) {
    if (const auto a = m.aliases.find(h); a != m.aliases.end()) h = a->second;
  }
  const std::set<std::string> present(t.header.begin(), t.header.end());
  std::set<std::string> known(m.columns.begin(), m.columns.end());
  known.insert(m.optional.begin(), m.optional.end());
  std::string unexpected, absent;
  for (const auto& h : present) {
    if (!known.contains(h)) unexpected += (unexpected.empty() ? "" : ", ") + h;
  }
  for (const auto& c : m.columns) {
    if (!present.contains(c)) absent += (absent.empty() ? "" : ", ") + c;
  }
  if (!unexpected.empty() || !absent.empty()) {
    std::string msg = path.string() + ": columns differ from the manifest.";
    if (!unexpected.empty()) msg += " Unexpected: " + unexpected + ".";
    if (!absent.empty()) msg += " Missing: " + absent + ".";
    throw SchemaError(msg);
  }
  return t;
}

class RowView {
 public:
  RowView(const std::vector<std::string>& row, const std::map<std::string, int>& index) : row_(row), index_(index) {}
  const std::string& operator[](const std::string& column) const {
    const auto it = index_.find(column);
    if (it == index_.end()) throw SchemaError("missing column " + column);
    return row_[static_cast<std::size_t>(it->second)];
  }
  double number(const std::string& column) const {
    const std::string& s = (*this)[column];
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
      throw SchemaError("column " + column + ": '" + s + "' is not a number");
    }
    return v;
  }

 private:
  const std::vector<std::string>& row_;
  const std::map<std::string, int>& index_;
};

enum class Kind { kNumeric, kText, kBinned, kRanked };

struct FeatureSpec {
  std::string name;
  Kind kind = Kind::kNumeric;
  std::vector<std::string> sources;  // raw columns that must be present
  std::function<double(const RowView&)> number;
  std::function<std::string(const RowView&)> text;
};

FeatureSpec numeric(const std::string& column, Kind kind = Kind::kNumeric) {
  return {column, kind, {column}, [column](const RowView& r) { return r.number(column); }, {}};
}

FeatureSpec text(const std::string& column) {
  return {column, Kind::kText, {column}, {}, [column](const RowView& r) { return r[column]; }};
}

// Decides a row's (a, y), or drops it by returning false.
using Target = std::function<bool(const RowView&, int& a, double& y)>;

struct Frame {
  std::vector<FeatureSpec> specs;
  std::vector<std::vector<double>> numbers;      // per feature
  std::vector<std::vector<std::string>> texts;   // per feature
  std::vector<int> a;
  std::vector<double> y;
  Eigen::Index rows() const { return static_cast<Eigen::Index>(a.size()); }
};

void append(Frame& f, const CsvTable& t, const Manifest& m, const std::vector<std::string>& target_sources,
            const Target& target) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < t.header.size(); ++i) index.emplace(t.header[i], static_cast<int>(i));
  f.numbers.resize(f.specs.size());
  f.texts.resize(f.specs.size());
  std::vector<int> used;
  for (const auto& s : f.specs) {
    for (const auto& c : s.sources) used.push_back(t.column(c));
  }
  for (const auto& c : target_sources) used.push_back(t.column(c));
  if (m.drop_incomplete_rows) {
    used.resize(t.header.size());
    for (std::size_t i = 0; i < used.size(); ++i) used[i] = static_cast<int>(i);
  }
  for (const auto& row : t.rows) {
    bool missing = false;
    for (int c : used) missing = missing || m.missing.contains(row[static_cast<std::size_t>(c)]);
    if (missing) continue;
    const RowView r(row, index);
    int a = 0;
    double y = 0;
    if (!target(r, a, y)) continue;
    for (std::size_t k = 0; k < f.specs.size(); ++k) {
      if (f.specs[k].kind == Kind::kText) {
        f.texts[k].push_back(f.specs[k].text(r));
      } else {
        f.numbers[k].push_back(f.specs[k].number(r));
      }
    }
    f.a.push_back(a);
    f.y.push_back(y);
  }
}

std::vector<std::string> sorted_categories(const std::vector<std::string>& values) {
  std::vector<std::string> cats(values.begin(), values.end());
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  const bool all_numeric = std::all_of(cats.begin(), cats.end(), [](const std::string& s) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
  });
  if (all_numeric) {
    std::sort(cats.begin(), cats.end(), [](const std::string& l, const std::string& r) {
      return std::stod(l) < std::stod(r);
    });
  }
  return cats;
}

std::string format_edge(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Column transforms fitted on the training rows, then applied to every split.
struct Fitted {
  std::vector<Column> columns;
  std::vector<std::map<std::string, int>> codes;  // text and ranked features
};

Fitted fit_columns(const Frame& f, const std::vector<Eigen::Index>& train, int bins) {
  Fitted out;
  out.columns.resize(f.specs.size());
  out.codes.resize(f.specs.size());
  for (std::size_t k = 0; k < f.specs.size(); ++k) {
    Column& c = out.columns[k];
    c.name = f.specs[k].name;
    switch (f.specs[k].kind) {
      case Kind::kNumeric:
        c.type = ColumnType::kContinuous;
        break;
      case Kind::kText: {
        // The vocabulary covers every split; it carries no label information.
        c.type = ColumnType::kCategorical;
        c.categories = sorted_categories(f.texts[k]);
        for (std::size_t i = 0; i < c.categories.size(); ++i) out.codes[k][c.categories[i]] = static_cast<int>(i);
        break;
      }
      case Kind::kBinned: {
        c.type = ColumnType::kCategorical;
        std::vector<double> values;
        for (Eigen::Index i : train) values.push_back(f.numbers[k][static_cast<std::size_t>(i)]);
        c.bin_edges = quantile_edges(values, bins);
        for (int b = 0; b <= static_cast<int>(c.bin_edges.size()); ++b) {
          const auto [lo, hi] = bin_interval(c.bin_edges, b);
          c.categories.push_back("[" + format_edge(lo) + "," + format_edge(hi) + ")");
        }
        break;
      }
      case Kind::kRanked: {
        // Ordered by decreasing positive-label rate on the training rows;
        // values unseen there go last in numeric order.
        c.type = ColumnType::kContinuous;
        std::map<double, std::pair<double, double>> stats;  // value -> (positives, count)
        for (Eigen::Index i : train) {
          auto& s = stats[f.numbers[k][static_cast<std::size_t>(i)]];
          s.first += f.y[static_cast<std::size_t>(i)];
          s.second += 1;
        }
        std::vector<std::pair<double, double>> order;  // (rate, value)
        for (const auto& [v, s] : stats) order.emplace_back(s.first / s.second, v);
        std::stable_sort(order.begin(), order.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
        std::set<double> unseen(f.numbers[k].begin(), f.numbers[k].end());
        int rank = 0;
        for (const auto& [rate, v] : order) {
          out.codes[k][format_edge(v)] = rank++;
          unseen.erase(v);
        }
        for (double v : unseen) out.codes[k][format_edge(v)] = rank++;
        break;
      }
    }
  }
  return out;
}

TabularDataset materialize(const Frame& f, const Fitted& fit, const std::vector<Eigen::Index>& rows,
                           const std::string& name, const std::string& split) {
  TabularDataset ds;
  ds.name = name;
  ds.split = split;
  ds.schema.columns = fit.columns;
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.x.resize(n, static_cast<Eigen::Index>(f.specs.size()));
  ds.a.resize(n);
  ds.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = static_cast<std::size_t>(rows[static_cast<std::size_t>(r)]);
    for (std::size_t k = 0; k < f.specs.size(); ++k) {
      double v = 0;
      switch (f.specs[k].kind) {
        case Kind::kNumeric: v = f.numbers[k][i]; break;
        case Kind::kText: v = fit.codes[k].at(f.texts[k][i]); break;
        case Kind::kBinned: v = bin_code(fit.columns[k].bin_edges, f.numbers[k][i]); break;
        case Kind::kRanked: v = fit.codes[k].at(format_edge(f.numbers[k][i])); break;
      }
      ds.x(r, static_cast<Eigen::Index>(k)) = v;
    }
    ds.a[r] = f.a[i];
    ds.y[r] = f.y[i];
  }
  return ds;
}

DatasetSplits finish(const Frame& f, SplitIndices idx, const std::string& name, const std::string& sensitive,
                     const std::string& label, const LoadConfig& config) {
  if (idx.train.empty() || idx.val.empty() || idx.test.empty()) {
    throw SchemaError(name + ": too few usable rows to split");
  }
  const Fitted fit = fit_columns(f, idx.train, config.compas_bins);
  DatasetSplits out;
  out.train = materialize(f, fit, idx.train, name, "train");
  out.val = materialize(f, fit, idx.val, name, "val");
  out.test = materialize(f, fit, idx.test, name, "test");
  for (auto* ds : {&out.train, &out.val, &out.test}) {
    ds->schema.sensitive = sensitive;
    ds->schema.label = label;
    ds->validate();
  }
  out.indices = std::move(idx);
  return out;
}

// Train/val from a seeded 80/20 split of `pool`.
void split_train_val(const std::vector<Eigen::Index>& pool, std::uint64_t seed, SplitIndices& idx) {
  const auto [tr, va] = split_rows(static_cast<Eigen::Index>(pool.size()), seed, "data.validation");
  for (Eigen::Index i : tr) idx.train.push_back(pool[static_cast<std::size_t>(i)]);
  for (Eigen::Index i : va) idx.val.push_back(pool[static_cast<std::size_t>(i)]);
}

SplitIndices standard_split(Eigen::Index n, std::uint64_t seed) {
  SplitIndices idx;
  const auto [pool, test] = split_rows(n, seed, "data.test");
  idx.test = test;
  split_train_val(pool, seed, idx);
  return idx;
}

DatasetSplits load_adult(const LoadConfig& config) {
  const Manifest m = read_manifest(config.schema_dir, "adult");
  Frame f;
  if (config.variant == Variant::kPreprocessed) {
    for (const char* c : {"relationship", "workclass", "marital-status", "race", "occupation", "education-num",
                          "education"}) {
      f.specs.push_back(text(c));
    }
  } else {
    for (const char* c : {"age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"}) {
      f.specs.push_back(numeric(c));
    }
    for (const char* c : {"workclass", "education", "marital-status", "occupation", "relationship", "race",
                          "native-country"}) {
      f.specs.push_back(text(c));
    }
  }
  const Target target = [](const RowView& r, int& a, double& y) {
    const std::string& sex = r["sex"];
    const std::string& income = r["income"];
    if (sex != "Female" && sex != "Male") throw SchemaError("adult: unexpected sex value '" + sex + "'");
    a = sex == "Female" ? 1 : 0;
    // The test file ends labels with a period.
    y = income.rfind(">50K", 0) == 0 ? 1.0 : 0.0;
    if (y == 0.0 && income.rfind("<=50K", 0) != 0) throw SchemaError("adult: unexpected income value '" + income + "'");
    return true;
  };
  append(f, read_source(config, m, "train"), m, {"sex", "income"}, target);
  const Eigen::Index n_train_file = f.rows();
  append(f, read_source(config, m, "test"), m, {"sex", "income"}, target);

  SplitIndices idx;
  std::vector<Eigen::Index> pool;
  for (Eigen::Index i = 0; i < n_train_file; ++i) pool.push_back(i);
  for (Eigen::Index i = n_train_file; i < f.rows(); ++i) idx.test.push_back(i);
  split_train_val(pool, config.seed, idx);
  return finish(f, std::move(idx), "adult", "sex = female", "income > 50K", config);
}

double parse_time(const std::string& s) {
  std::tm tm{};
  std::istringstream in(s);
  in >> std::get_time(&tm, s.size() > 10 ? "%Y-%m-%d %H:%M:%S" : "%Y-%m-%d");
  if (in.fail()) throw SchemaError("unparseable timestamp '" + s + "'");
  return static_cast<double>(timegm(&tm));
}

FeatureSpec days_between(const std::string& name, const std::string& from, const std::string& to, Kind kind) {
  return {name, kind, {from, to},
          [from, to](const RowView& r) { return (parse_time(r[to]) - parse_time(r[from])) / 86400.0; }, {}};
}

DatasetSplits load_compas(const LoadConfig& config) {
  if (config.compas_bins < 1) throw UsageError("compas bin count must be positive");
  const Manifest m = read_manifest(config.schema_dir, "compas");
  Frame f;
  const Kind cont = config.variant == Variant::kPreprocessed ? Kind::kBinned : Kind::kNumeric;
  f.specs.push_back(numeric("age", cont));
  f.specs.push_back(days_between("diff_custody", "in_custody", "out_custody", cont));
  f.specs.push_back(days_between("diff_jail", "c_jail_in", "c_jail_out", cont));
  f.specs.push_back(numeric("priors_count", cont));
  f.specs.push_back(text("sex"));
  f.specs.push_back(text("c_charge_degree"));
  f.specs.push_back(text("v_score_text"));
  if (config.variant == Variant::kOriginal) {
    for (const char* c : {"juv_fel_count", "juv_misd_count", "juv_other_count", "days_b_screening_arrest",
                          "c_days_from_compas", "decile_score", "v_decile_score"}) {
      f.specs.push_back(numeric(c));
    }
    f.specs.push_back(text("age_cat"));
    f.specs.push_back(text("score_text"));
  }
  // Standard screening filter for this file: arrest within 30 days of the
  // assessment, a known recidivism outcome, no ordinary traffic offences.
  const Target target = [](const RowView& r, int& a, double& y) {
    const std::string& race = r["race"];
    if (race != "Caucasian" && race != "African-American") return false;
    const double gap = r.number("days_b_screening_arrest");
    if (gap < -30 || gap > 30) return false;
    if (r["is_recid"] == "-1" || r["c_charge_degree"] == "O" || r["score_text"] == "N/A") return false;
    a = race == "African-American" ? 1 : 0;
    // y = 1 is the favourable outcome: no recidivism within two years.
    y = r["two_year_recid"] == "0" ? 1.0 : 0.0;
    return true;
  };
  append(f, read_source(config, m, "all"), m,
         {"race", "days_b_screening_arrest", "is_recid", "score_text", "two_year_recid"}, target);
  SplitIndices idx = standard_split(f.rows(), config.seed);
  return finish(f, std::move(idx), "compas", "race = African-American", "no recidivism within two years", config);
}

DatasetSplits load_crime(const LoadConfig& config) {
  const Manifest m = read_manifest(config.schema_dir, "crime");
  const CsvTable t = read_source(config, m, "all");
  Frame f;
  if (config.variant == Variant::kPreprocessed) {
    for (const char* c : {"racePctWhite", "pctWInvInc", "PctFam2Par", "PctKids2Par", "PctYoungKids2Par", "PctIlleg"}) {
      f.specs.push_back(numeric(c));
    }
    f.specs.back().name = "PctKidsBornNeverMar";
  } else {
    // Every predictive column without missing values.
    const std::set<std::string> skip = {"state", "county", "community", "communityname", "fold", "ViolentCrimesPerPop"};
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      if (skip.contains(t.header[j])) continue;
      const bool complete = std::none_of(t.rows.begin(), t.rows.end(),
                                         [&](const auto& row) { return m.missing.contains(row[j]); });
      if (complete) f.specs.push_back(numeric(t.header[j]));
    }
  }
  // Positive label: violent crime rate below the median of the full table.
  std::vector<double> crime;
  const int label_col = t.column("ViolentCrimesPerPop");
  for (const auto& row : t.rows) {
    if (!m.missing.contains(row[static_cast<std::size_t>(label_col)])) crime.push_back(std::stod(row[label_col]));
  }
  if (crime.empty()) throw SchemaError("crime: no labelled rows");
  std::vector<double> sorted = crime;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  const Target target = [median](const RowView& r, int& a, double& y) {
    const double minority = r.number("racepctblack") + r.number("racePctAsian") + r.number("racePctHisp");
    a = r.number("racePctWhite") / 5 < minority ? 1 : 0;
    y = r.number("ViolentCrimesPerPop") < median ? 1.0 : 0.0;
    return true;
  };
  append(f, t, m, {"racepctblack", "racePctWhite", "racePctAsian", "racePctHisp", "ViolentCrimesPerPop"}, target);
  SplitIndices idx = standard_split(f.rows(), config.seed);
  return finish(f, std::move(idx), "crime", "white share / 5 below black + asian + hispanic share",
                "violent crime rate below median", config);
}

DatasetSplits load_law(const LoadConfig& config) {
  const Manifest m = read_manifest(config.schema_dir, "law");
  const CsvTable t = read_source(config, m, "all");
  Frame f;
  f.specs.push_back(numeric("lsat"));
  f.specs.push_back(numeric("gpa"));
  f.specs.push_back(numeric("college", Kind::kRanked));
  if (config.variant == Variant::kOriginal) {
    for (const char* c : {"year", "gender", "resident"}) {
      if (t.has_column(c)) f.specs.push_back(text(c));
    }
  }
  const Target target = [](const RowView& r, int& a, double& y) {
    const std::string& white = r["white"];
    const std::string& admit = r["admit"];
    if ((white != "0" && white != "1") || (admit != "0" && admit != "1")) {
      throw SchemaError("law: white and admit must be 0/1");
    }
    a = white == "1" ? 0 : 1;
    y = admit == "1" ? 1.0 : 0.0;
    return true;
  };
  append(f, t, m, {"white", "admit"}, target);
  SplitIndices idx = standard_split(f.rows(), config.seed);
  return finish(f, std::move(idx), "law", "non-white", "admitted", config);
}

DatasetSplits load_synthetic(const LoadConfig& config) {
  const numerics::Rng root(config.seed);
  DatasetSplits out;
  out.train = make_synthetic(config.synthetic_train_per_group, root.split("synthetic.train").next_u64());
  out.val = make_synthetic(std::max<Eigen::Index>(1, config.synthetic_train_per_group / 4),
                           root.split("synthetic.val").next_u64());
  out.test = make_synthetic(config.synthetic_test_per_group, root.split("synthetic.test").next_u64());
  out.train.split = "train";
  out.val.split = "val";
  out.test.split = "test";
  return out;
}

}  // namespace

DatasetSplits load_dataset(const std::string& name, const LoadConfig& config) {
  if (name == "adult") return load_adult(config);
  if (name == "compas") return load_compas(config);
  if (name == "crime") return load_crime(config);
  if (name == "law") return load_law(config);
  if (name == "synthetic") return load_synthetic(config);
  throw UsageError("unknown dataset '" + name + "' (expected adult, compas, crime, law or synthetic)");
}

}  // namespace fnf::data
