#pragma once

#include <cstdint>

#include "fnf/data/dataset.hpp"

namespace fnf::data {

// Two groups of two-component Gaussian mixtures with identity covariance:
// group 0 centred at (-3, 3) and (3, 3), group 1 at (-3, -3) and (3, -3).
// The label is 1 iff both coordinates share a sign. Groups are stacked,
// group 0 first.
TabularDataset make_synthetic(Eigen::Index n_per_group, std::uint64_t seed);

}  // namespace fnf::data
