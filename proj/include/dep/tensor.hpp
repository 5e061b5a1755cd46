#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dep/error.hpp"

namespace dep {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatrixRM>;
using ConstMapMat = Eigen::Map<const MatrixRM>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

std::string shape_str(const Shape& s);
Index shape_size(const Shape& s);

// Dense row-major tensor of 64-bit floats. The single value type every module
// traffics in; rank is dynamic but layers only use ranks 1, 2 and 4.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != static_cast<Index>(data_.size()))
      throw DimensionError("tensor: shape " + shape_str(shape_) + " does not match data length " +
                           std::to_string(data_.size()));
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  Index rank() const { return static_cast<Index>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
  Index size() const { return static_cast<Index>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }
  double& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }

  double& at(Index i, Index j) { return data_[static_cast<std::size_t>(i * dim(1) + j)]; }
  double at(Index i, Index j) const { return data_[static_cast<std::size_t>(i * dim(1) + j)]; }
  double& at(Index b, Index c, Index h, Index w) {
    return data_[static_cast<std::size_t>(((b * dim(1) + c) * dim(2) + h) * dim(3) + w)];
  }
  double at(Index b, Index c, Index h, Index w) const {
    return data_[static_cast<std::size_t>(((b * dim(1) + c) * dim(2) + h) * dim(3) + w)];
  }

  // Rank-2 view.
  MapMat mat() {
    require_rank(2);
    return MapMat(data(), dim(0), dim(1));
  }
  ConstMapMat mat() const {
    require_rank(2);
    return ConstMapMat(data(), dim(0), dim(1));
  }

  // Reinterpret the flat buffer as rows x cols.
  MapMat as_mat(Index rows, Index cols) {
    if (rows * cols != size())
      throw DimensionError("tensor: cannot view " + shape_str(shape_) + " as " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    return MapMat(data(), rows, cols);
  }
  ConstMapMat as_mat(Index rows, Index cols) const {
    if (rows * cols != size())
      throw DimensionError("tensor: cannot view " + shape_str(shape_) + " as " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    return ConstMapMat(data(), rows, cols);
  }

  MapVec vec() { return MapVec(data(), size()); }
  ConstMapVec vec() const { return ConstMapVec(data(), size()); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Tensor reshaped(Shape new_shape) const {
    if (shape_size(new_shape) != size())
      throw DimensionError("tensor: reshape " + shape_str(shape_) + " -> " + shape_str(new_shape) +
                           " changes element count");
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
  }

 private:
  void require_rank(Index r) const {
    if (rank() != r)
      throw DimensionError("tensor: expected rank " + std::to_string(r) + ", got shape " + shape_str(shape_));
  }

  static Index checked_size(const Shape& s) {
    for (Index d : s)
      if (d <= 0) throw DimensionError("tensor: non-positive dimension in shape " + shape_str(s));
    return shape_size(s);
  }

  Shape shape_;
  std::vector<double> data_;
};

}  // namespace dep
