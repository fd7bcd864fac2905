// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/tensor.hpp"

#include <algorithm>
#include <numeric>

namespace gt360::nn {

namespace {
size_t shape_size(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("Tensor: negative dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    throw ShapeError("Tensor: data size does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = rng.normal(0.0, stddev);
  return t;
}

std::string Tensor::shape_str() const {
  std::string s = "(";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_inplace(const Tensor& o) {
  if (!same_shape(o))
    throw ShapeError("Tensor::add_inplace shape mismatch " + shape_str() +
                     " vs " + o.shape_str());
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
}

double Tensor::min() const {
  return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
  return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

void require_shape(const Tensor& t, const std::vector<int>& shape,
                   const std::string& context) {
  if (t.shape() != shape) {
    Tensor want(shape);
    throw ShapeError(context + ": expected shape " + want.shape_str() +
                     ", got " + t.shape_str());
  }
}

}  // namespace gt360::nn
