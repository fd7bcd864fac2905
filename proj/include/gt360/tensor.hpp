// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_TENSOR_HPP
#define GT360_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gt360/common.hpp"
#include "gt360/rng.hpp"

namespace gt360::nn {

// Dense row-major tensor of doubles. Image-like tensors use (H, W, C) order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor randn(std::vector<int> shape, Rng& rng, double stddev = 1.0);

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i]; }
  size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at2(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double at2(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double& at3(int i, int j, int k) {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double at3(int i, int j, int k) const {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;

  void fill(double v);
  void add_inplace(const Tensor& o);
  double min() const;
  double max() const;
  double sum() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

void require_shape(const Tensor& t, const std::vector<int>& shape,
                   const std::string& context);

}  // namespace gt360::nn

#endif  // GT360_TENSOR_HPP
