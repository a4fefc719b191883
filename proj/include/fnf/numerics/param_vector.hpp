#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fnf::numerics {

// A named rectangular block inside a flat parameter array.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// Accumulates segments before a ParamVector is allocated.
class ParamLayout {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return size_; }

 private:
  std::vector<Segment> segments_;
  std::size_t size_ = 0;
};

// Flat real parameters with segment labels. The length is fixed at
// construction; only values change afterwards. Segments are stored
// column-major so they map directly onto Eigen matrices.
class ParamVector {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

  ParamVector() = default;
  explicit ParamVector(const ParamLayout& layout);

  std::size_t size() const { return values_.size(); }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t segment_index(const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  Eigen::Map<Eigen::VectorXd> as_vector() {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }
  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  MatrixMap matrix(std::size_t segment);
  ConstMatrixMap matrix(std::size_t segment) const;

  // Replaces all values; the length must match.
  void assign(std::span<const double> values);

  bool all_finite() const;

 private:
  std::vector<double> values_;
  std::vector<Segment> segments_;
};

}  // namespace fnf::numerics
