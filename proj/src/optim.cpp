// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/optim.hpp"

#include <cmath>

namespace gt360::nn {

AdamW::AdamW(std::vector<Var> params, double beta1, double beta2, double eps,
             double weight_decay)
    : params_(std::move(params)),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      weight_decay_(weight_decay) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Tensor::zeros(p->value.shape()));
    v_.push_back(Tensor::zeros(p->value.shape()));
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Node& p = *params_[i];
    Tensor& g = p.ensure_grad();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (size_t j = 0; j < g.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p.value[j] -=
          lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * p.value[j]);
    }
  }
}

void AdamW::zero_grad() { nn::zero_grad(params_); }

}  // namespace gt360::nn
