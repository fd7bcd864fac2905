// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/autograd.hpp"

#include <cmath>
#include <unordered_set>

namespace gt360::nn {

namespace {

Var make_node(Tensor value, std::vector<Var> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->needs_grad;
  n->needs_grad = needs;
  if (needs) n->parents = std::move(parents);
  return n;
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// C[M,N] += A[M,K] * B[K,N]
void gemm_acc(int m, int k, int n, const double* a, const double* b, double* c) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var param(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->needs_grad = true;
  n->ensure_grad();
  return n;
}

void backward(const Var& root) {
  if (root->value.size() != 1)
    throw ShapeError("backward: root must be a scalar, got " +
                     root->value.shape_str());
  if (!root->needs_grad) return;

  std::vector<Node*> post_order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->needs_grad && visited.insert(p).second)
        stack.push_back({p, 0});
    } else {
      post_order.push_back(f.node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = post_order.rbegin(); it != post_order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

void zero_grad(const std::vector<Var>& params) {
  for (const auto& p : params) p->ensure_grad().fill(0.0);
}

size_t param_count(const std::vector<Var>& params) {
  size_t n = 0;
  for (const auto& p : params) n += p->value.size();
  return n;
}

// ---------------------------------------------------------------- elementwise

Var add(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value))
    throw ShapeError("add: shape mismatch " + a->value.shape_str() + " vs " +
                     b->value.shape_str());
  Tensor out = a->value;
  out.add_inplace(b->value);
  Var n = make_node(std::move(out), {a, b});
  if (n->needs_grad)
    n->backward_fn = [a, b](Node& o) {
      if (a->needs_grad) a->ensure_grad().add_inplace(o.grad);
      if (b->needs_grad) b->ensure_grad().add_inplace(o.grad);
    };
  return n;
}

Var sub(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value))
    throw ShapeError("sub: shape mismatch");
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  Var n = make_node(std::move(out), {a, b});
  if (n->needs_grad)
    n->backward_fn = [a, b](Node& o) {
      if (a->needs_grad) a->ensure_grad().add_inplace(o.grad);
      if (b->needs_grad) {
        Tensor& g = b->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
      }
    };
  return n;
}

Var mul(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value))
    throw ShapeError("mul: shape mismatch");
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  Var n = make_node(std::move(out), {a, b});
  if (n->needs_grad)
    n->backward_fn = [a, b](Node& o) {
      if (a->needs_grad) {
        Tensor& g = a->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * b->value[i];
      }
      if (b->needs_grad) {
        Tensor& g = b->ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * a->value[i];
      }
    };
  return n;
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
  Var n = make_node(std::move(out), {a});
  if (n->needs_grad)
    n->backward_fn = [a, s](Node& o) {
      Tensor& g = a->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += s * o.grad[i];
    };
  return n;
}

Var relu(const Var& a) {
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  Var n = make_node(std::move(out), {a});
  if (n->needs_grad)
    n->backward_fn = [a](Node& o) {
      Tensor& g = a->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i)
        if (a->value[i] > 0.0) g[i] += o.grad[i];
    };
  return n;
}

Var gelu(const Var& a) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  Var n = make_node(std::move(out), {a});
  if (n->needs_grad)
    n->backward_fn = [a](Node& o) {
      Tensor& g = a->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) {
        const double x = a->value[i];
        const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        g[i] += o.grad[i] * (cdf + x * pdf);
      }
    };
  return n;
}

Var sigmoid(const Var& a) {
  Tensor out = a->value;
  for (size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(out[i]);
  Var n = make_node(std::move(out), {a});
  if (n->needs_grad) {
    const Tensor s = n->value;
    n->backward_fn = [a, s](Node& o) {
      Tensor& g = a->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i)
        g[i] += o.grad[i] * s[i] * (1.0 - s[i]);
    };
  }
  return n;
}

// --------------------------------------------------------------------- matrix

Var matmul(const Var& a, const Var& b) {
  if (a->value.ndim() != 2 || b->value.ndim() != 2 ||
      a->value.dim(1) != b->value.dim(0))
    throw ShapeError("matmul: incompatible shapes " + a->value.shape_str() +
                     " x " + b->value.shape_str());
  const int m = a->value.dim(0), k = a->value.dim(1), nn_ = b->value.dim(1);
  Tensor out({m, nn_});
  gemm_acc(m, k, nn_, a->value.data(), b->value.data(), out.data());
  Var n = make_node(std::move(out), {a, b});
  if (n->needs_grad)
    n->backward_fn = [a, b, m, k, nn_](Node& o) {
      if (a->needs_grad) {
        // dA[i,p] += dot(G[i,:], B[p,:])
        Tensor& ga = a->ensure_grad();
        for (int i = 0; i < m; ++i) {
          const double* grow = o.grad.data() + static_cast<size_t>(i) * nn_;
          double* garow = ga.data() + static_cast<size_t>(i) * k;
          for (int p = 0; p < k; ++p) {
            const double* brow = b->value.data() + static_cast<size_t>(p) * nn_;
            double s = 0.0;
            for (int j = 0; j < nn_; ++j) s += grow[j] * brow[j];
            garow[p] += s;
          }
        }
      }
      if (b->needs_grad) {
        // dB[p,:] += A[i,p] * G[i,:]
        Tensor& gb = b->ensure_grad();
        for (int i = 0; i < m; ++i) {
          const double* arow = a->value.data() + static_cast<size_t>(i) * k;
          const double* grow = o.grad.data() + static_cast<size_t>(i) * nn_;
          for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* gbrow = gb.data() + static_cast<size_t>(p) * nn_;
            for (int j = 0; j < nn_; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
    };
  return n;
}

Var transpose(const Var& a) {
  if (a->value.ndim() != 2) throw ShapeError("transpose: expected 2-D tensor");
  const int r = a->value.dim(0), c = a->value.dim(1);
  Tensor out({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at2(j, i) = a->value.at2(i, j);
  Var n = make_node(std::move(out), {a});
  if (n->needs_grad)
    n->backward_fn = [a, r, c](Node& o) {
      Tensor& g = a->ensure_grad();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) g.at2(i, j) += o.grad.at2(j, i);
    };
  return n;
}

Var add_rowvec(const Var& x, const Var& v) {
  if (x->value.ndim() != 2 || v->value.ndim() != 1 ||
      x->value.dim(1) != v->value.dim(0))
    throw ShapeError("add_rowvec: shape mismatch");
  const int r = x->value.dim(0), c = x->value.dim(1);
  Tensor out = x->value;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at2(i, j) += v->value[j];
  Var n = make_node(std::move(out), {x, v});
  if (n->needs_grad)
    n->backward_fn = [x, v, r, c](Node& o) {
      if (x->needs_grad) x->ensure_grad().add_inplace(o.grad);
      if (v->needs_grad) {
        Tensor& g = v->ensure_grad();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) g[j] += o.grad.at2(i, j);
      }
    };
  return n;
}

Var add_masked_rows(const Var& x, const std::vector<uint8_t>& mask,
                    const Var& v) {
  if (x->value.ndim() != 2 || v->value.ndim() != 1 ||
      x->value.dim(1) != v->value.dim(0) ||
      mask.size() != static_cast<size_t>(x->value.dim(0)))
    throw ShapeError("add_masked_rows: shape mismatch");
  const int r = x->value.dim(0), c = x->value.dim(1);
  Tensor out = x->value;
  for (int i = 0; i < r; ++i)
    if (mask[i])
      for (int j = 0; j < c; ++j) out.at2(i, j) += v->value[j];
  Var n = make_node(std::move(out), {x, v});
  if (n->needs_grad)
    n->backward_fn = [x, v, mask, r, c](Node& o) {
      if (x->needs_grad) x->ensure_grad().add_inplace(o.grad);
      if (v->needs_grad) {
        Tensor& g = v->ensure_grad();
        for (int i = 0; i < r; ++i)
          if (mask[i])
            for (int j = 0; j < c; ++j) g[j] += o.grad.at2(i, j);
      }
    };
  return n;
}

Var slice_cols(const Var& x, int c0, int c1) {
  if (x->value.ndim() != 2 || c0 < 0 || c1 > x->value.dim(1) || c0 >= c1)
    throw ShapeError("slice_cols: bad range");
  const int r = x->value.dim(0), w = c1 - c0;
  Tensor out({r, w});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < w; ++j) out.at2(i, j) = x->value.at2(i, c0 + j);
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, c0, r, w](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j) g.at2(i, c0 + j) += o.grad.at2(i, j);
    };
  return n;
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: empty input");
  const int r = parts[0]->value.dim(0);
  int total = 0;
  for (const auto& p : parts) {
    if (p->value.ndim() != 2 || p->value.dim(0) != r)
      throw ShapeError("concat_cols: row mismatch");
    total += p->value.dim(1);
  }
  Tensor out({r, total});
  int off = 0;
  for (const auto& p : parts) {
    const int w = p->value.dim(1);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j) out.at2(i, off + j) = p->value.at2(i, j);
    off += w;
  }
  Var n = make_node(std::move(out), parts);
  if (n->needs_grad)
    n->backward_fn = [parts, r](Node& o) {
      int off = 0;
      for (const auto& p : parts) {
        const int w = p->value.dim(1);
        if (p->needs_grad) {
          Tensor& g = p->ensure_grad();
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j) g.at2(i, j) += o.grad.at2(i, off + j);
        }
        off += w;
      }
    };
  return n;
}

Var softmax_rows(const Var& x) {
  if (x->value.ndim() != 2) throw ShapeError("softmax_rows: expected 2-D");
  const int r = x->value.dim(0), c = x->value.dim(1);
  Tensor out = x->value;
  for (int i = 0; i < r; ++i) {
    double m = out.at2(i, 0);
    for (int j = 1; j < c; ++j) m = std::max(m, out.at2(i, j));
    double s = 0.0;
    for (int j = 0; j < c; ++j) {
      const double e = std::exp(out.at2(i, j) - m);
      out.at2(i, j) = e;
      s += e;
    }
    for (int j = 0; j < c; ++j) out.at2(i, j) /= s;
  }
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad) {
    const Tensor y = n->value;
    n->backward_fn = [x, y, r, c](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int i = 0; i < r; ++i) {
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += o.grad.at2(i, j) * y.at2(i, j);
        for (int j = 0; j < c; ++j)
          g.at2(i, j) += y.at2(i, j) * (o.grad.at2(i, j) - dot);
      }
    };
  }
  return n;
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  if (x->value.ndim() != 2 || gamma->value.dim(0) != x->value.dim(1) ||
      beta->value.dim(0) != x->value.dim(1))
    throw ShapeError("layer_norm: shape mismatch");
  const int r = x->value.dim(0), c = x->value.dim(1);
  Tensor out({r, c});
  Tensor xhat({r, c});
  std::vector<double> inv_std(r);
  for (int i = 0; i < r; ++i) {
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += x->value.at2(i, j);
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) {
      const double d = x->value.at2(i, j) - mean;
      var += d * d;
    }
    var /= c;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    for (int j = 0; j < c; ++j) {
      const double h = (x->value.at2(i, j) - mean) * is;
      xhat.at2(i, j) = h;
      out.at2(i, j) = gamma->value[j] * h + beta->value[j];
    }
  }
  Var n = make_node(std::move(out), {x, gamma, beta});
  if (n->needs_grad)
    n->backward_fn = [x, gamma, beta, xhat, inv_std, r, c](Node& o) {
      if (gamma->needs_grad) {
        Tensor& gg = gamma->ensure_grad();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) gg[j] += o.grad.at2(i, j) * xhat.at2(i, j);
      }
      if (beta->needs_grad) {
        Tensor& gb = beta->ensure_grad();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) gb[j] += o.grad.at2(i, j);
      }
      if (x->needs_grad) {
        Tensor& gx = x->ensure_grad();
        for (int i = 0; i < r; ++i) {
          double mean_dh = 0.0, mean_dh_xhat = 0.0;
          for (int j = 0; j < c; ++j) {
            const double dh = o.grad.at2(i, j) * gamma->value[j];
            mean_dh += dh;
            mean_dh_xhat += dh * xhat.at2(i, j);
          }
          mean_dh /= c;
          mean_dh_xhat /= c;
          for (int j = 0; j < c; ++j) {
            const double dh = o.grad.at2(i, j) * gamma->value[j];
            gx.at2(i, j) +=
                inv_std[i] * (dh - mean_dh - xhat.at2(i, j) * mean_dh_xhat);
          }
        }
      }
    };
  return n;
}

Var mean_rows(const Var& x) {
  if (x->value.ndim() != 2) throw ShapeError("mean_rows: expected 2-D");
  const int r = x->value.dim(0), c = x->value.dim(1);
  Tensor out({c});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j] += x->value.at2(i, j);
  for (int j = 0; j < c; ++j) out[j] /= r;
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, r, c](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) g.at2(i, j) += o.grad[j] / r;
    };
  return n;
}

Var reshape(const Var& x, std::vector<int> shape) {
  Tensor out(std::move(shape), x->value.vec());
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x](Node& o) {
      Tensor& g = x->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    };
  return n;
}

// ----------------------------------------------------------------- reductions

Var mean_all(const Var& x) {
  const size_t count = x->value.size();
  Tensor out({1});
  out[0] = x->value.sum() / static_cast<double>(count);
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, count](Node& o) {
      Tensor& g = x->ensure_grad();
      const double s = o.grad[0] / static_cast<double>(count);
      for (size_t i = 0; i < g.size(); ++i) g[i] += s;
    };
  return n;
}

Var sum_all(const Var& x) {
  Tensor out({1});
  out[0] = x->value.sum();
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x](Node& o) {
      Tensor& g = x->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[0];
    };
  return n;
}

// -------------------------------------------------------------------- spatial

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  if (x->value.ndim() != 3 || w->value.ndim() != 4)
    throw ShapeError("conv2d: expected x[H,W,C], w[kh,kw,Cin,Cout]");
  const int h = x->value.dim(0), wd = x->value.dim(1), ci = x->value.dim(2);
  const int kh = w->value.dim(0), kw = w->value.dim(1);
  if (w->value.dim(2) != ci)
    throw ShapeError("conv2d: input channels " + std::to_string(ci) +
                     " do not match weight " + std::to_string(w->value.dim(2)));
  const int co = w->value.dim(3);
  if (b->value.ndim() != 1 || b->value.dim(0) != co)
    throw ShapeError("conv2d: bias shape mismatch");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) throw ShapeError("conv2d: output would be empty");

  Tensor out({oh, ow, co});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      double* orow = out.data() + (static_cast<size_t>(oy) * ow + ox) * co;
      for (int c = 0; c < co; ++c) orow[c] = b->value[c];
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= wd) continue;
          const double* xpix =
              x->value.data() + (static_cast<size_t>(iy) * wd + ix) * ci;
          const double* wrow =
              w->value.data() + (static_cast<size_t>(ky) * kw + kx) * ci * co;
          for (int c = 0; c < ci; ++c) {
            const double xv = xpix[c];
            if (xv == 0.0) continue;
            const double* wk = wrow + static_cast<size_t>(c) * co;
            for (int o2 = 0; o2 < co; ++o2) orow[o2] += xv * wk[o2];
          }
        }
      }
    }

  Var n = make_node(std::move(out), {x, w, b});
  if (n->needs_grad)
    n->backward_fn = [x, w, b, stride, pad, h, wd, ci, kh, kw, co, oh,
                      ow](Node& o) {
      Tensor* gx = x->needs_grad ? &x->ensure_grad() : nullptr;
      Tensor* gw = w->needs_grad ? &w->ensure_grad() : nullptr;
      Tensor* gb = b->needs_grad ? &b->ensure_grad() : nullptr;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const double* grow =
              o.grad.data() + (static_cast<size_t>(oy) * ow + ox) * co;
          if (gb)
            for (int c = 0; c < co; ++c) (*gb)[c] += grow[c];
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= wd) continue;
              const size_t xoff = (static_cast<size_t>(iy) * wd + ix) * ci;
              const size_t woff =
                  (static_cast<size_t>(ky) * kw + kx) * ci * co;
              for (int c = 0; c < ci; ++c) {
                const double* wk = w->value.data() + woff + static_cast<size_t>(c) * co;
                if (gx) {
                  double s = 0.0;
                  for (int o2 = 0; o2 < co; ++o2) s += grow[o2] * wk[o2];
                  (*gx)[xoff + c] += s;
                }
                if (gw) {
                  const double xv = x->value[xoff + c];
                  if (xv != 0.0) {
                    double* gwk = gw->data() + woff + static_cast<size_t>(c) * co;
                    for (int o2 = 0; o2 < co; ++o2) gwk[o2] += xv * grow[o2];
                  }
                }
              }
            }
          }
        }
    };
  return n;
}

Var avg_pool_ceil(const Var& x, int k) {
  if (x->value.ndim() != 3) throw ShapeError("avg_pool_ceil: expected [H,W,C]");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  const int oh = (h + k - 1) / k, ow = (w + k - 1) / k;
  Tensor out({oh, ow, c});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const int y0 = oy * k, y1 = std::min(y0 + k, h);
      const int x0 = ox * k, x1 = std::min(x0 + k, w);
      const double inv = 1.0 / ((y1 - y0) * (x1 - x0));
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int iy = y0; iy < y1; ++iy)
          for (int ix = x0; ix < x1; ++ix) s += x->value.at3(iy, ix, ch);
        out.at3(oy, ox, ch) = s * inv;
      }
    }
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, k, h, w, c, oh, ow](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const int y0 = oy * k, y1 = std::min(y0 + k, h);
          const int x0 = ox * k, x1 = std::min(x0 + k, w);
          const double inv = 1.0 / ((y1 - y0) * (x1 - x0));
          for (int ch = 0; ch < c; ++ch) {
            const double gv = o.grad.at3(oy, ox, ch) * inv;
            for (int iy = y0; iy < y1; ++iy)
              for (int ix = x0; ix < x1; ++ix) g.at3(iy, ix, ch) += gv;
          }
        }
    };
  return n;
}

Var global_avg_pool(const Var& x) {
  if (x->value.ndim() != 3) throw ShapeError("global_avg_pool: expected [H,W,C]");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  Tensor out({c});
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      for (int ch = 0; ch < c; ++ch) out[ch] += x->value.at3(iy, ix, ch);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int ch = 0; ch < c; ++ch) out[ch] *= inv;
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, h, w, c, inv](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix)
          for (int ch = 0; ch < c; ++ch)
            g.at3(iy, ix, ch) += o.grad[ch] * inv;
    };
  return n;
}

Var upsample_nearest(const Var& x, int out_h, int out_w) {
  if (x->value.ndim() != 3) throw ShapeError("upsample_nearest: expected [H,W,C]");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  Tensor out({out_h, out_w, c});
  for (int oy = 0; oy < out_h; ++oy) {
    const int sy = static_cast<int>(static_cast<int64_t>(oy) * h / out_h);
    for (int ox = 0; ox < out_w; ++ox) {
      const int sx = static_cast<int>(static_cast<int64_t>(ox) * w / out_w);
      for (int ch = 0; ch < c; ++ch)
        out.at3(oy, ox, ch) = x->value.at3(sy, sx, ch);
    }
  }
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, out_h, out_w, h, w, c](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int oy = 0; oy < out_h; ++oy) {
        const int sy = static_cast<int>(static_cast<int64_t>(oy) * h / out_h);
        for (int ox = 0; ox < out_w; ++ox) {
          const int sx = static_cast<int>(static_cast<int64_t>(ox) * w / out_w);
          for (int ch = 0; ch < c; ++ch)
            g.at3(sy, sx, ch) += o.grad.at3(oy, ox, ch);
        }
      }
    };
  return n;
}

namespace {
struct LerpAxis {
  int i0, i1;
  double w1;  // weight of i1; weight of i0 is 1-w1
};
LerpAxis bilinear_axis(int out_i, int in_n, int out_n) {
  double s = (out_i + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
  if (s < 0.0) s = 0.0;
  if (s > in_n - 1) s = in_n - 1;
  const int i0 = static_cast<int>(s);
  const int i1 = std::min(i0 + 1, in_n - 1);
  return {i0, i1, s - i0};
}
}  // namespace

Var upsample_bilinear(const Var& x, int out_h, int out_w) {
  if (x->value.ndim() != 3) throw ShapeError("upsample_bilinear: expected [H,W,C]");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  Tensor out({out_h, out_w, c});
  for (int oy = 0; oy < out_h; ++oy) {
    const LerpAxis ay = bilinear_axis(oy, h, out_h);
    for (int ox = 0; ox < out_w; ++ox) {
      const LerpAxis ax = bilinear_axis(ox, w, out_w);
      for (int ch = 0; ch < c; ++ch) {
        const double top = x->value.at3(ay.i0, ax.i0, ch) * (1 - ax.w1) +
                           x->value.at3(ay.i0, ax.i1, ch) * ax.w1;
        const double bot = x->value.at3(ay.i1, ax.i0, ch) * (1 - ax.w1) +
                           x->value.at3(ay.i1, ax.i1, ch) * ax.w1;
        out.at3(oy, ox, ch) = top * (1 - ay.w1) + bot * ay.w1;
      }
    }
  }
  Var n = make_node(std::move(out), {x});
  if (n->needs_grad)
    n->backward_fn = [x, out_h, out_w, h, w, c](Node& o) {
      Tensor& g = x->ensure_grad();
      for (int oy = 0; oy < out_h; ++oy) {
        const LerpAxis ay = bilinear_axis(oy, h, out_h);
        for (int ox = 0; ox < out_w; ++ox) {
          const LerpAxis ax = bilinear_axis(ox, w, out_w);
          for (int ch = 0; ch < c; ++ch) {
            const double gv = o.grad.at3(oy, ox, ch);
            g.at3(ay.i0, ax.i0, ch) += gv * (1 - ay.w1) * (1 - ax.w1);
            g.at3(ay.i0, ax.i1, ch) += gv * (1 - ay.w1) * ax.w1;
            g.at3(ay.i1, ax.i0, ch) += gv * ay.w1 * (1 - ax.w1);
            g.at3(ay.i1, ax.i1, ch) += gv * ay.w1 * ax.w1;
          }
        }
      }
    };
  return n;
}

// --------------------------------------------------------------------- losses

Var bce_with_logits_mean(const Var& logits, const Tensor& targets) {
  if (!logits->value.same_shape(targets))
    throw ShapeError("bce_with_logits_mean: shape mismatch " +
                     logits->value.shape_str() + " vs " + targets.shape_str());
  const size_t count = targets.size();
  double loss = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const double z = logits->value[i];
    const double t = targets[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor out({1});
  out[0] = loss / static_cast<double>(count);
  Var n = make_node(std::move(out), {logits});
  if (n->needs_grad)
    n->backward_fn = [logits, targets, count](Node& o) {
      Tensor& g = logits->ensure_grad();
      const double s = o.grad[0] / static_cast<double>(count);
      for (size_t i = 0; i < count; ++i)
        g[i] += s * (stable_sigmoid(logits->value[i]) - targets[i]);
    };
  return n;
}

}  // namespace gt360::nn
