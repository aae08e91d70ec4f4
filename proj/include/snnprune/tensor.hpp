#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "snnprune/errors.hpp"

namespace snnprune {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

/// Image-like activation geometry.
struct Shape4 {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  Shape to_shape() const { return {batch, channels, height, width}; }
  std::size_t plane() const { return height * width; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense row-major n-dimensional array. Storage is a contiguous Eigen vector so
/// any slice of it can be mapped as an Eigen matrix without copying.
template <typename Scalar>
class BasicTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)), data_(Vector::Constant(Eigen::Index(numel(shape_)), fill)) {}

  BasicTensor(Shape shape, std::initializer_list<Scalar> values)
      : BasicTensor(std::move(shape), std::vector<Scalar>(values)) {}

  BasicTensor(Shape shape, const std::vector<Scalar>& values) : shape_(std::move(shape)) {
    if (numel(shape_) != values.size()) {
      throw DimensionError("tensor: shape " + shape_string(shape_) + " does not hold " +
                           std::to_string(values.size()) + " values");
    }
    data_ = Eigen::Map<const Vector>(values.data(), Eigen::Index(values.size()));
  }

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor zeros_like(const BasicTensor& other) { return BasicTensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return std::size_t(data_.size()); }
  bool empty() const noexcept { return data_.size() == 0; }

  Shape4 shape4() const {
    if (rank() != 4) throw DimensionError("expected rank-4 tensor, got " + shape_string(shape_));
    return {shape_[0], shape_[1], shape_[2], shape_[3]};
  }

  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }
  std::span<Scalar> values() noexcept { return {data_.data(), size()}; }
  std::span<const Scalar> values() const noexcept { return {data_.data(), size()}; }

  Scalar& operator[](std::size_t i) { return data_[Eigen::Index(i)]; }
  const Scalar& operator[](std::size_t i) const { return data_[Eigen::Index(i)]; }

  Scalar& at(std::size_t i, std::size_t j) { return data_[Eigen::Index(i * shape_[1] + j)]; }
  const Scalar& at(std::size_t i, std::size_t j) const {
    return data_[Eigen::Index(i * shape_[1] + j)];
  }
  Scalar& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[Eigen::Index(((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x)];
  }
  const Scalar& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[Eigen::Index(((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x)];
  }

  Vector& vec() noexcept { return data_; }
  const Vector& vec() const noexcept { return data_; }

  /// Row-major matrix view over the whole buffer.
  MatrixMap matrix(std::size_t rows, std::size_t cols) {
    check_matrix(rows, cols);
    return MatrixMap(data_.data(), Eigen::Index(rows), Eigen::Index(cols));
  }
  ConstMatrixMap matrix(std::size_t rows, std::size_t cols) const {
    check_matrix(rows, cols);
    return ConstMatrixMap(data_.data(), Eigen::Index(rows), Eigen::Index(cols));
  }
  /// Leading axis as rows, everything else flattened into columns.
  MatrixMap matrix() { return matrix(rows(), cols()); }
  ConstMatrixMap matrix() const { return matrix(rows(), cols()); }

  BasicTensor reshaped(Shape shape) const {
    if (numel(shape) != size()) {
      throw DimensionError("reshape " + shape_string(shape_) + " -> " + shape_string(shape));
    }
    BasicTensor out = *this;
    out.shape_ = std::move(shape);
    return out;
  }

  void fill(Scalar v) { data_.setConstant(v); }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.empty() || shape_[0] == 0 ? 0 : size() / shape_[0]; }
  void check_matrix(std::size_t rows, std::size_t cols) const {
    if (rows * cols != size()) {
      throw DimensionError("matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                           " over " + shape_string(shape_));
    }
  }

  Shape shape_;
  Vector data_;
};

using Tensor = BasicTensor<double>;

template <typename Scalar>
Scalar max_abs_diff(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  if (a.empty()) return Scalar(0);
  return (a.vec() - b.vec()).cwiseAbs().maxCoeff();
}

}  // namespace snnprune
