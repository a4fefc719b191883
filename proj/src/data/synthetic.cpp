#include "fnf/data/synthetic.hpp"

#include "fnf/errors.hpp"
#include "fnf/numerics/rng.hpp"

namespace fnf::data {

TabularDataset make_synthetic(Eigen::Index n_per_group, std::uint64_t seed) {
  if (n_per_group < 1) throw UsageError("synthetic data needs at least one row per group");
  numerics::Rng rng(seed);
  TabularDataset ds;
  ds.name = "synthetic";
  ds.split = "all";
  ds.x.resize(2 * n_per_group, 2);
  ds.a.resize(2 * n_per_group);
  ds.y.resize(2 * n_per_group);
  for (Eigen::Index i = 0; i < 2 * n_per_group; ++i) {
    const int group = i < n_per_group ? 0 : 1;
    const double cx = rng.bernoulli(0.5) ? 3.0 : -3.0;
    const double cy = group == 0 ? 3.0 : -3.0;
    ds.x(i, 0) = cx + rng.normal();
    ds.x(i, 1) = cy + rng.normal();
    ds.a[i] = group;
    ds.y[i] = (ds.x(i, 0) > 0) == (ds.x(i, 1) > 0) ? 1.0 : 0.0;
  }
  ds.schema.columns = {Column{"x1", ColumnType::kContinuous, {}, {}}, Column{"x2", ColumnType::kContinuous, {}, {}}};
  ds.schema.sensitive = "lower mixture";
  ds.schema.label = "sign(x1) == sign(x2)";
  return ds;
}

}  // namespace fnf::data
