// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_AUTOGRAD_HPP
#define GT360_AUTOGRAD_HPP

#include <functional>
#include <memory>
#include <vector>

#include "gt360/tensor.hpp"

namespace gt360::nn {

// Reverse-mode autodiff over Tensor values. A forward pass builds a DAG of
// Nodes; backward() walks it in reverse topological order. Leaves created
// with param() accumulate gradients; constant leaves do not, and subgraphs
// that cannot reach a parameter skip closure construction entirely.
struct Node {
  Tensor value;
  Tensor grad;                    // allocated lazily, same shape as value
  bool requires_grad = false;     // parameter leaf
  bool needs_grad = false;        // any ancestor requires grad
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor::zeros(value.shape());
    return grad;
  }
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);
Var param(Tensor value);

// Runs backprop from a scalar root (size-1 tensor), seeding d(root)=1.
void backward(const Var& root);

void zero_grad(const std::vector<Var>& params);
size_t param_count(const std::vector<Var>& params);

// ----- elementwise -----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var gelu(const Var& a);
Var sigmoid(const Var& a);

// ----- 2-D matrix ops, shapes [R,C] -----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add_rowvec(const Var& x, const Var& v);            // x:[R,C] + v:[C]
Var add_masked_rows(const Var& x, const std::vector<uint8_t>& mask,
                    const Var& v);                     // adds v to rows with mask!=0
Var slice_cols(const Var& x, int c0, int c1);
Var concat_cols(const std::vector<Var>& parts);
Var softmax_rows(const Var& x);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta,
               double eps = 1e-5);
Var mean_rows(const Var& x);                           // [R,C] -> [C]
Var reshape(const Var& x, std::vector<int> shape);

// ----- reductions -----
Var mean_all(const Var& x);                            // -> [1]
Var sum_all(const Var& x);                             // -> [1]

// ----- spatial ops, shapes [H,W,C]; weights [kh,kw,Cin,Cout] -----
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var avg_pool_ceil(const Var& x, int k);                // stride k, partial windows
Var global_avg_pool(const Var& x);                     // -> [C]
Var upsample_nearest(const Var& x, int out_h, int out_w);
Var upsample_bilinear(const Var& x, int out_h, int out_w);

// ----- losses (targets are constants) -----
// Mean over all elements of BCE(sigmoid(logit), target); numerically stable.
Var bce_with_logits_mean(const Var& logits, const Tensor& targets);

}  // namespace gt360::nn

#endif  // GT360_AUTOGRAD_HPP
