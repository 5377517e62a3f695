// Copyright 2026 The docrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "docrec/errors.hpp"

namespace docrec {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Dense row-major n-dimensional array of doubles. Rank-2 views are
/// exposed as Eigen maps so kernels can stay in Eigen expressions.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<Eigen::Index> shape)
      : shape_(std::move(shape)), data_(Vector::Zero(product(shape_))) {}

  Tensor(std::vector<Eigen::Index> shape, Vector data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_))
      throw ShapeError("tensor data length does not match shape");
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  Eigen::Index dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<Eigen::Index>& shape() const { return shape_; }
  Eigen::Index size() const { return data_.size(); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  double& operator()(std::initializer_list<Eigen::Index> idx) {
    return data_[offset(idx)];
  }
  double operator()(std::initializer_list<Eigen::Index> idx) const {
    return data_[offset(idx)];
  }

  /// Rows-by-cols map over the flat storage. rows*cols must equal size().
  Eigen::Map<Matrix> as_matrix(Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != data_.size())
      throw ShapeError("matrix view does not cover the tensor");
    return Eigen::Map<Matrix>(data_.data(), rows, cols);
  }
  Eigen::Map<const Matrix> as_matrix(Eigen::Index rows,
                                     Eigen::Index cols) const {
    if (rows * cols != data_.size())
      throw ShapeError("matrix view does not cover the tensor");
    return Eigen::Map<const Matrix>(data_.data(), rows, cols);
  }

  /// Last dimension (channel axis by convention).
  Eigen::Index channels() const {
    return shape_.empty() ? 0 : shape_.back();
  }

  bool all_finite() const {
    for (Eigen::Index i = 0; i < data_.size(); ++i)
      if (!std::isfinite(data_[i])) return false;
    return true;
  }

 private:
  static Eigen::Index product(const std::vector<Eigen::Index>& s) {
    Eigen::Index p = 1;
    for (Eigen::Index d : s) p *= d;
    return p;
  }

  Eigen::Index offset(std::initializer_list<Eigen::Index> idx) const {
    Eigen::Index off = 0;
    std::size_t k = 0;
    for (Eigen::Index i : idx) {
      off = off * shape_[k] + i;
      ++k;
    }
    return off;
  }

  std::vector<Eigen::Index> shape_;
  Vector data_;
};

}  // namespace docrec
