#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fnf::data {

enum class ColumnType { kContinuous, kCategorical };

struct Column {
  std::string name;
  ColumnType type = ColumnType::kContinuous;
  // Category labels for categorical columns; code i means categories[i].
  std::vector<std::string> categories;
  // Interior bin edges when the column was discretized from a numeric one.
  std::vector<double> bin_edges;
};

struct Schema {
  std::vector<Column> columns;
  std::string sensitive;  // description of a = 1
  std::string label;      // description of y = 1

  bool categorical() const;
  std::vector<int> cardinalities() const;
};

// Rows are examples. Categorical features hold integer codes as doubles.
struct TabularDataset {
  std::string name;
  std::string split;
  Eigen::MatrixXd x;
  Eigen::VectorXi a;
  Eigen::VectorXd y;
  Schema schema;

  Eigen::Index rows() const { return x.rows(); }
  int features() const { return static_cast<int>(x.cols()); }
  // Rows whose sensitive attribute equals `group`.
  TabularDataset group(int group) const;
  TabularDataset subset(const std::vector<Eigen::Index>& rows) const;
  // Throws SchemaError if shapes or values are inconsistent.
  void validate() const;
  Eigen::MatrixXi codes() const;
};

}  // namespace fnf::data
