// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_OPTIM_HPP
#define GT360_OPTIM_HPP

#include <vector>

#include "gt360/autograd.hpp"

namespace gt360::nn {

// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(std::vector<Var> params, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8, double weight_decay = 0.01);

  void step(double lr);
  void zero_grad();
  const std::vector<Var>& params() const { return params_; }
  int64_t step_count() const { return t_; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double beta1_, beta2_, eps_, weight_decay_;
  int64_t t_ = 0;
};

}  // namespace gt360::nn

#endif  // GT360_OPTIM_HPP
