#include "fnf/numerics/param_vector.hpp"

#include <algorithm>
#include <cmath>

#include "fnf/errors.hpp"

namespace fnf::numerics {

std::size_t ParamLayout::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0) throw UsageError("negative segment shape for " + name);
  Segment s{std::move(name), size_, rows, cols};
  size_ += s.size();
  segments_.push_back(std::move(s));
  return segments_.size() - 1;
}

ParamVector::ParamVector(const ParamLayout& layout)
    : values_(layout.size(), 0.0), segments_(layout.segments()) {}

std::size_t ParamVector::segment_index(const std::string& name) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].name == name) return i;
  }
  throw UsageError("unknown parameter segment: " + name);
}

ParamVector::MatrixMap ParamVector::matrix(std::size_t segment) {
  const Segment& s = segments_.at(segment);
  return {values_.data() + s.offset, s.rows, s.cols};
}

ParamVector::ConstMatrixMap ParamVector::matrix(std::size_t segment) const {
  const Segment& s = segments_.at(segment);
  return {values_.data() + s.offset, s.rows, s.cols};
}

void ParamVector::assign(std::span<const double> values) {
  if (values.size() != values_.size()) {
    throw UsageError("parameter length mismatch: expected " + std::to_string(values_.size()) +
                     ", got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), values_.begin());
}

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace fnf::numerics
