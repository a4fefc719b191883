#include "fnf/data/dataset.hpp"

#include <cmath>

#include "fnf/errors.hpp"

namespace fnf::data {

bool Schema::categorical() const {
  if (columns.empty()) return false;
  for (const auto& c : columns) {
    if (c.type != ColumnType::kCategorical) return false;
  }
  return true;
}

std::vector<int> Schema::cardinalities() const {
  std::vector<int> out;
  for (const auto& c : columns) {
    if (c.type != ColumnType::kCategorical) throw SchemaError("column " + c.name + " is not categorical");
    out.push_back(static_cast<int>(c.categories.size()));
  }
  return out;
}

TabularDataset TabularDataset::subset(const std::vector<Eigen::Index>& rows) const {
  TabularDataset out;
  out.name = name;
  out.split = split;
  out.schema = schema;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, x.cols());
  out.a.resize(n);
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    out.x.row(i) = x.row(r);
    out.a[i] = a[r];
    out.y[i] = y[r];
  }
  return out;
}

TabularDataset TabularDataset::group(int g) const {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] == g) rows.push_back(i);
  }
  return subset(rows);
}

void TabularDataset::validate() const {
  if (a.size() != x.rows() || y.size() != x.rows()) throw SchemaError(name + ": a/y lengths differ from row count");
  if (!schema.columns.empty() && static_cast<Eigen::Index>(schema.columns.size()) != x.cols()) {
    throw SchemaError(name + ": schema has " + std::to_string(schema.columns.size()) + " columns, matrix has " +
                      std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw SchemaError(name + ": missing or non-finite feature values");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (a[i] != 0 && a[i] != 1) throw SchemaError(name + ": sensitive attribute must be 0/1");
    if (y[i] != 0.0 && y[i] != 1.0) throw SchemaError(name + ": label must be 0/1");
  }
  for (std::size_t j = 0; j < schema.columns.size(); ++j) {
    const Column& c = schema.columns[j];
    if (c.type != ColumnType::kCategorical) continue;
    const auto col = x.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double v = col[i];
      if (v != std::floor(v) || v < 0 || v >= static_cast<double>(c.categories.size())) {
        throw SchemaError(name + ": column " + c.name + " has an invalid code");
      }
    }
  }
}

Eigen::MatrixXi TabularDataset::codes() const {
  if (!schema.categorical()) throw SchemaError(name + ": dataset is not fully categorical");
  return x.cast<int>();
}

}  // namespace fnf::data
