#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "fnf/data/cache.hpp"
#include "fnf/data/csv.hpp"
#include "fnf/data/loaders.hpp"
#include "fnf/data/sanity.hpp"
#include "fnf/data/synthetic.hpp"
#include "fnf/errors.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::data {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fnf_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool have_raw(const std::string& name) {
  const fs::path root = default_data_root();
  if (name == "adult") return fs::exists(root / "adult" / "adult.data") && fs::exists(root / "adult" / "adult.test");
  if (name == "compas") return fs::exists(root / "compas" / "compas-scores-two-years.csv");
  return false;
}

TEST(Synthetic, LabelsFollowTheSignRule) {
  const TabularDataset ds = make_synthetic(2000, 3);
  ASSERT_EQ(ds.rows(), 4000);
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    const bool same = (ds.x(i, 0) > 0) == (ds.x(i, 1) > 0);
    EXPECT_EQ(ds.y[i], same ? 1.0 : 0.0);
  }
  ds.validate();
}

TEST(Synthetic, GroupMeansAndBaseRates) {
  const TabularDataset ds = make_synthetic(10000, 4);
  for (int g = 0; g < 2; ++g) {
    const TabularDataset part = ds.group(g);
    const Eigen::RowVectorXd mean = part.x.colwise().mean();
    // Each coordinate has variance 1 + 9 (x1) or 1 (x2); 4 sigma bands.
    EXPECT_NEAR(mean[0], 0.0, 4 * std::sqrt(10.0 / 10000));
    EXPECT_NEAR(mean[1], g == 0 ? 3.0 : -3.0, 4 * std::sqrt(1.0 / 10000));
    EXPECT_NEAR(part.y.mean(), 0.5, 4 * 0.5 / std::sqrt(10000.0));
  }
}

TEST(Synthetic, RejectsEmptyGroups) { EXPECT_THROW(make_synthetic(0, 1), UsageError); }

TEST(Csv, QuotedFieldsAndDoubledQuotes) {
  const auto f = split_csv_line(R"(1, two ,"three, four","say ""hi""",)");
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[0], "1");
  EXPECT_EQ(f[1], "two");
  EXPECT_EQ(f[2], "three, four");
  EXPECT_EQ(f[3], "say \"hi\"");
  EXPECT_EQ(f[4], "");
  EXPECT_THROW(split_csv_line("\"open"), SchemaError);
}

TEST(Csv, RoundTripAndRaggedRows) {
  const fs::path dir = scratch_dir("csv");
  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{"1", "x, y"}, {"2", "q\"uote"}};
  write_csv(dir / "t.csv", t);
  const CsvTable back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1);
  EXPECT_THROW(back.column("c"), SchemaError);

  std::ofstream(dir / "ragged.csv") << "a,b\n1,2\n3\n";
  EXPECT_THROW(read_csv(dir / "ragged.csv"), SchemaError);
  EXPECT_THROW(read_csv(dir / "absent.csv"), MissingInputError);
}

TEST(Split, DeterministicAndSized) {
  const auto [a1, b1] = split_rows(1994, 7, "data.test");
  const auto [a2, b2] = split_rows(1994, 7, "data.test");
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(b1, b2);
  EXPECT_EQ(a1.size(), 1595u);
  EXPECT_EQ(b1.size(), 399u);
  std::set<Eigen::Index> all(a1.begin(), a1.end());
  all.insert(b1.begin(), b1.end());
  EXPECT_EQ(all.size(), 1994u);
  const auto [a3, b3] = split_rows(1994, 8, "data.test");
  EXPECT_NE(a1, a3);
}

TEST(Bins, DecodeOfEncodeLandsInTheSameBin) {
  numerics::Rng rng(2);
  std::vector<double> values;
  for (int i = 0; i < 1000; ++i) values.push_back(std::floor(std::exp(2 * rng.normal())));
  const auto edges = quantile_edges(values, 5);
  ASSERT_FALSE(edges.empty());
  EXPECT_LE(edges.size(), 4u);
  EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
  for (int i = 0; i < 2000; ++i) {
    const double v = 50 * rng.normal();
    const int code = bin_code(edges, v);
    const auto [lo, hi] = bin_interval(edges, code);
    EXPECT_LE(lo, v);
    EXPECT_LT(v, hi);
  }
  for (double e : edges) EXPECT_EQ(bin_interval(edges, bin_code(edges, e)).first, e);
}

TEST(Bins, QuantilesOfDistinctValuesAreBalanced) {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i);
  const auto edges = quantile_edges(values, 5);
  EXPECT_EQ(edges, (std::vector<double>{20, 40, 60, 80}));
  const std::vector<double> constant(10, 3.0);
  EXPECT_TRUE(quantile_edges(constant, 5).empty());
}

// A tiny Crime-shaped file: 128 unnamed-in-file columns, '?' for missing.
void write_crime_fixture(const fs::path& root, int rows, bool wide = false) {
  fs::create_directories(root / "crime");
  std::ifstream manifest(default_schema_dir() / "crime.json");
  ASSERT_TRUE(manifest.good());
  std::ofstream out(root / "crime" / "communities.data");
  numerics::Rng rng(rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 128 + (wide ? 1 : 0); ++c) {
      if (c) out << ',';
      if (c == 3) {
        out << "Town" << r;
      } else if (c == 6 && r % 3 == 0) {
        out << '?';
      } else {
        out << std::round(100 * rng.uniform()) / 100;
      }
    }
    out << '\n';
  }
}

TEST(Crime, LoadsFixtureWithRaceRuleAndMedianLabel) {
  const fs::path root = scratch_dir("crime");
  write_crime_fixture(root, 200);
  LoadConfig c = default_load_config();
  c.root = root;
  const DatasetSplits s = load_dataset("crime", c);
  EXPECT_EQ(s.train.rows() + s.val.rows() + s.test.rows(), 200);
  EXPECT_EQ(s.test.rows(), 40);
  EXPECT_EQ(s.val.rows(), 32);
  ASSERT_EQ(s.train.features(), 6);
  EXPECT_EQ(s.train.schema.columns.back().name, "PctKidsBornNeverMar");
  EXPECT_FALSE(s.train.schema.categorical());

  // Recompute a from the raw file for the training rows.
  const CsvTable raw = read_csv(root / "crime" / "communities.data", {.header = false});
  for (std::size_t k = 0; k < s.indices.train.size(); ++k) {
    const auto& row = raw.rows[static_cast<std::size_t>(s.indices.train[k])];
    const double white = std::stod(row[8]);
    const double minority = std::stod(row[7]) + std::stod(row[9]) + std::stod(row[10]);
    EXPECT_EQ(s.train.a[static_cast<Eigen::Index>(k)], white / 5 < minority ? 1 : 0);
    EXPECT_EQ(s.train.x(static_cast<Eigen::Index>(k), 0), white);
  }
  const double positives = s.train.y.sum() + s.val.y.sum() + s.test.y.sum();
  EXPECT_LE(positives, 100);
  EXPECT_GE(positives, 80);

  c.variant = Variant::kOriginal;
  const DatasetSplits orig = load_dataset("crime", c);
  // 128 minus five identifiers, the label, and the column with missing values.
  EXPECT_EQ(orig.train.features(), 128 - 6 - 1);
}

TEST(Crime, SchemaDriftIsReported) {
  const fs::path root = scratch_dir("crime_drift");
  write_crime_fixture(root, 20, true);
  LoadConfig c = default_load_config();
  c.root = root;
  try {
    load_dataset("crime", c);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 128 columns, found 129"), std::string::npos);
  }
}

void write_law_fixture(const fs::path& root, const std::string& header, int rows) {
  fs::create_directories(root / "law");
  std::ofstream out(root / "law" / "law.csv");
  out << header << '\n';
  numerics::Rng rng(17);
  for (int r = 0; r < rows; ++r) {
    const int college = static_cast<int>(rng.index(5));
    // College c admits with probability (c + 1) / 6.
    const int admit = rng.uniform() < (college + 1) / 6.0 ? 1 : 0;
    out << 140 + static_cast<int>(rng.index(40)) << ',' << 2.0 + 2 * rng.uniform() << ',' << college << ','
        << (rng.uniform() < 0.8 ? 1 : 0) << ',' << admit << ',' << 2005 + r % 2 << '\n';
  }
}

TEST(Law, CollegeIsRankedByTrainingAdmissionRate) {
  const fs::path root = scratch_dir("law");
  write_law_fixture(root, "lsat,gpa,college,white,admit,year", 3000);
  LoadConfig c = default_load_config();
  c.root = root;
  const DatasetSplits s = load_dataset("law", c);
  ASSERT_EQ(s.train.features(), 3);
  const CsvTable raw = read_csv(root / "law" / "law.csv");
  // Highest admission rate (college 4) gets rank 0.
  for (std::size_t k = 0; k < s.indices.train.size(); ++k) {
    const int college = std::stoi(raw.rows[static_cast<std::size_t>(s.indices.train[k])][2]);
    EXPECT_EQ(s.train.x(static_cast<Eigen::Index>(k), 2), 4 - college);
    EXPECT_EQ(s.train.a[static_cast<Eigen::Index>(k)],
              raw.rows[static_cast<std::size_t>(s.indices.train[k])][3] == "1" ? 0 : 1);
  }
  c.variant = Variant::kOriginal;
  EXPECT_EQ(load_dataset("law", c).train.features(), 4);
}

TEST(Law, UnexpectedAndMissingColumnsAreListed) {
  const fs::path root = scratch_dir("law_drift");
  write_law_fixture(root, "lsat,gpa,school,white,admit,shoe_size", 10);
  LoadConfig c = default_load_config();
  c.root = root;
  try {
    load_dataset("law", c);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Unexpected: school, shoe_size"), std::string::npos) << msg;
    EXPECT_NE(msg.find("Missing: college"), std::string::npos) << msg;
  }
}

TEST(Loaders, MissingFilesAndUnknownNames) {
  LoadConfig c = default_load_config();
  c.root = scratch_dir("empty");
  EXPECT_THROW(load_dataset("crime", c), MissingInputError);
  EXPECT_THROW(load_dataset("health", c), UsageError);
  c.schema_dir = c.root;
  EXPECT_THROW(load_dataset("law", c), MissingInputError);
}

TEST(Loaders, SyntheticSplits) {
  LoadConfig c = default_load_config();
  c.synthetic_train_per_group = 100;
  c.synthetic_test_per_group = 50;
  const DatasetSplits s = load_dataset("synthetic", c);
  EXPECT_EQ(s.train.rows(), 200);
  EXPECT_EQ(s.val.rows(), 50);
  EXPECT_EQ(s.test.rows(), 100);
  EXPECT_NE(s.train.x(0, 0), s.test.x(0, 0));
}

TEST(Cache, RoundTripIsExact) {
  const fs::path root = scratch_dir("cache_src");
  write_crime_fixture(root, 120);
  LoadConfig c = default_load_config();
  c.root = root;
  const DatasetSplits s = load_dataset("crime", c);
  const fs::path dir = scratch_dir("cache");
  save_cache(dir, s, {.seed = c.seed});
  const DatasetSplits back = load_cache(dir, "crime");
  for (const auto& [x, y] : {std::pair{&s.train, &back.train}, {&s.val, &back.val}, {&s.test, &back.test}}) {
    EXPECT_EQ(x->x, y->x);
    EXPECT_EQ(x->a, y->a);
    EXPECT_EQ(x->y, y->y);
    EXPECT_EQ(x->schema.columns.size(), y->schema.columns.size());
  }
  EXPECT_THROW(load_cache(dir, "adult"), MissingInputError);
  fs::remove(dir / "crime.val.csv");
  try {
    load_cache(dir, "crime");
    FAIL();
  } catch (const MissingInputError& e) {
    EXPECT_NE(std::string(e.what()).find("crime.val.csv"), std::string::npos);
  }
}

TEST(DesignEncoder, OneHotAndStandardize) {
  TabularDataset ds;
  ds.x.resize(4, 2);
  ds.x << 0, 1, 2, 3, 1, 5, 0, 7;
  ds.a = Eigen::VectorXi::Zero(4);
  ds.y = Eigen::VectorXd::Zero(4);
  ds.schema.columns = {Column{"c", ColumnType::kCategorical, {"p", "q", "r"}, {}}, Column{"v"}};
  const DesignEncoder e = DesignEncoder::fit(ds);
  ASSERT_EQ(e.width(), 4);
  const Eigen::MatrixXd m = e.apply(ds);
  EXPECT_EQ(m.row(1).head(3), Eigen::RowVector3d(0, 0, 1));
  EXPECT_NEAR(m.col(3).mean(), 0.0, 1e-12);
  EXPECT_NEAR(m.col(3).squaredNorm() / 4, 1.0, 1e-12);
}

// Real files: checked only where FNF_DATA_ROOT provides them.
TEST(Adult, SplitSizesAndMarginals) {
  if (!have_raw("adult")) GTEST_SKIP() << "adult raw files not found under " << default_data_root();
  LoadConfig c = default_load_config();
  const DatasetSplits s = load_dataset("adult", c);
  EXPECT_EQ(s.train.rows(), 24129);
  EXPECT_EQ(s.val.rows(), 6033);
  EXPECT_EQ(s.test.rows(), 15060);
  EXPECT_TRUE(s.train.schema.categorical());
  EXPECT_EQ(s.train.schema.cardinalities(), (std::vector<int>{6, 7, 7, 5, 14, 16, 16}));
  // The test split is fixed by the source files.
  EXPECT_NEAR(s.test.a.cast<double>().mean(), 0.326, 0.01);
  EXPECT_NEAR(s.test.y.mean(), 0.246, 0.01);
  const double n = static_cast<double>(s.train.rows() + s.val.rows());
  EXPECT_NEAR((s.train.a.cast<double>().sum() + s.val.a.cast<double>().sum()) / n,
              (24129 * 0.326 + 6033 * 0.319) / n, 0.01);
  EXPECT_NEAR((s.train.y.sum() + s.val.y.sum()) / n, 0.249, 0.01);
}

TEST(Adult, SameSeedSameSplit) {
  if (!have_raw("adult")) GTEST_SKIP() << "adult raw files not found";
  LoadConfig c = default_load_config();
  const auto h1 = load_dataset("adult", c).indices.hash();
  EXPECT_EQ(h1, load_dataset("adult", c).indices.hash());
  c.seed = 1;
  EXPECT_NE(h1, load_dataset("adult", c).indices.hash());
}

TEST(Compas, SplitSizesBinsAndPooledMarginals) {
  if (!have_raw("compas")) GTEST_SKIP() << "compas raw file not found under " << default_data_root();
  LoadConfig c = default_load_config();
  const DatasetSplits s = load_dataset("compas", c);
  EXPECT_EQ(s.train.rows(), 3377);
  EXPECT_EQ(s.val.rows(), 845);
  EXPECT_EQ(s.test.rows(), 1056);
  ASSERT_EQ(s.train.features(), 7);
  for (int j = 0; j < 4; ++j) {
    const Column& col = s.train.schema.columns[static_cast<std::size_t>(j)];
    EXPECT_LE(col.categories.size(), 5u) << col.name;
    EXPECT_EQ(col.categories.size(), col.bin_edges.size() + 1) << col.name;
  }
  // Pooled over all splits, so the comparison does not depend on how rows
  // were shuffled.
  const double n = 5278;
  auto pooled = [&](auto&& f) { return (f(s.train) + f(s.val) + f(s.test)) / n; };
  EXPECT_NEAR(pooled([](const TabularDataset& d) { return d.a.cast<double>().sum(); }),
              (3377 * 0.606 + 845 * 0.600 + 1056 * 0.589) / n, 0.01);
  EXPECT_NEAR(pooled([](const TabularDataset& d) { return d.y.sum(); }),
              (3377 * 0.523 + 845 * 0.522 + 1056 * 0.556) / n, 0.01);
  c.compas_bins = 3;
  const DatasetSplits three = load_dataset("compas", c);
  EXPECT_LE(three.train.schema.columns[0].categories.size(), 3u);
  EXPECT_EQ(three.indices.hash(), s.indices.hash());
}

}  // namespace
}  // namespace fnf::data
