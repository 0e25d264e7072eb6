// Copyright 2026 The qalloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qalloc/nn/autograd.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include "qalloc/errors.hpp"

namespace qalloc::nn {

namespace {

thread_local bool g_grad_enabled = true;

void require_shape(bool ok, const char* what) {
  if (!ok) fail(ErrorKind::InvalidArgument, what);
}

int as_int(std::size_t n) { return static_cast<int>(n); }

// C[m,n] = alpha * op(A) op(B) + beta * C, row-major.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double* a, const double* b, double beta,
          double* c) {
  if (m == 0 || n == 0) return;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, as_int(m), as_int(n),
              as_int(k), 1.0, a, trans_a ? as_int(m) : as_int(k), b,
              trans_b ? as_int(k) : as_int(n), beta, c, as_int(n));
}

Var make_result(Tensor value, std::vector<Var> inputs,
                std::function<void(Node&)> backward_fn) {
  auto out = std::make_shared<Node>();
  out->value = std::move(value);
  if (g_grad_enabled) {
    const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                   [](const Var& v) { return v->requires_grad; });
    if (needs) {
      out->requires_grad = true;
      out->inputs = std::move(inputs);
      out->backward_fn = std::move(backward_fn);
    }
  }
  return out;
}

}  // namespace

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require_shape(data_.size() == element_count(shape_), "tensor data does not match shape");
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  require_shape(element_count(shape) == data_.size(), "reshape changes element count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

Tensor& Node::grad_buffer() {
  if (grad.size() != value.size() || grad.shape() != value.shape()) {
    grad = Tensor(value.shape(), 0.0);
  }
  return grad;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() noexcept { return g_grad_enabled; }

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

void backward(const Var& root) {
  require_shape(root->value.size() == 1, "backward needs a scalar root");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS; graphs can be deep.
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    node->grad_buffer();
    if (node->backward_fn) node->backward_fn(*node);
  }
}

Var matmul(const Var& x, const Var& w) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  require_shape(wv.shape().size() == 2 && xv.cols() == wv.shape()[0], "matmul inner dimensions differ");
  const std::size_t n = xv.rows(), k = xv.cols(), m = wv.shape()[1];
  Tensor out({n, m});
  gemm(false, false, n, m, k, xv.ptr(), wv.ptr(), 0.0, out.ptr());
  return make_result(std::move(out), {x, w}, [n, k, m](Node& self) {
    const Var& xi = self.inputs[0];
    const Var& wi = self.inputs[1];
    const double* g = self.grad.ptr();
    if (xi->requires_grad) {
      gemm(false, true, n, k, m, g, wi->value.ptr(), 1.0, xi->grad_buffer().ptr());
    }
    if (wi->requires_grad) {
      gemm(true, false, k, m, n, xi->value.ptr(), g, 1.0, wi->grad_buffer().ptr());
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  const std::size_t n = x->value.rows(), m = x->value.cols();
  require_shape(bias->value.size() == m, "bias width differs from input");
  Tensor out = x->value;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) out[r * m + c] += bias->value[c];
  }
  return make_result(std::move(out), {x, bias}, [n, m](Node& self) {
    const Tensor& g = self.grad;
    if (self.inputs[0]->requires_grad) {
      Tensor& gx = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (self.inputs[1]->requires_grad) {
      Tensor& gb = self.inputs[1]->grad_buffer();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) gb[c] += g[r * m + c];
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_shape(a->value.size() == b->value.size(), "add operands differ in size");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (const Var& in : self.inputs) {
      if (!in->requires_grad) continue;
      Tensor& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x->value;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return make_result(std::move(out), {x}, [](Node& self) {
    const Var& in = self.inputs[0];
    Tensor& g = in->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in->value[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const std::size_t n = x->value.rows(), m = x->value.cols();
  require_shape(gamma->value.size() == m && beta->value.size() == m, "layer norm width mismatch");
  Tensor out(x->value.shape());
  auto normed = std::make_shared<std::vector<double>>(n * m);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  const double* xv = x->value.ptr();
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < m; ++c) mean += xv[r * m + c];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double d = xv[r * m + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < m; ++c) {
      const double h = (xv[r * m + c] - mean) * is;
      (*normed)[r * m + c] = h;
      out[r * m + c] = h * gamma->value[c] + beta->value[c];
    }
  }
  return make_result(std::move(out), {x, gamma, beta}, [n, m, normed, inv_std](Node& self) {
    const Var& xi = self.inputs[0];
    const Var& gi = self.inputs[1];
    const Var& bi = self.inputs[2];
    const Tensor& g = self.grad;
    const auto& h = *normed;
    if (gi->requires_grad || bi->requires_grad) {
      Tensor& gg = gi->grad_buffer();
      Tensor& gb = bi->grad_buffer();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          gg[c] += g[r * m + c] * h[r * m + c];
          gb[c] += g[r * m + c];
        }
      }
    }
    if (xi->requires_grad) {
      Tensor& gx = xi->grad_buffer();
      std::vector<double> dh(m);
      for (std::size_t r = 0; r < n; ++r) {
        double mean_dh = 0.0, mean_dh_h = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
          dh[c] = g[r * m + c] * gi->value[c];
          mean_dh += dh[c];
          mean_dh_h += dh[c] * h[r * m + c];
        }
        mean_dh /= static_cast<double>(m);
        mean_dh_h /= static_cast<double>(m);
        for (std::size_t c = 0; c < m; ++c) {
          gx[r * m + c] += (*inv_std)[r] * (dh[c] - mean_dh - h[r * m + c] * mean_dh_h);
        }
      }
    }
  });
}

Var attention(const Var& q, const Var& k, const Var& v, std::size_t groups,
              std::size_t heads) {
  const std::size_t d = q->value.cols();
  require_shape(heads > 0 && d % heads == 0, "embedding width not divisible by head count");
  require_shape(k->value.cols() == d && v->value.cols() == d, "attention widths differ");
  require_shape(groups > 0 && q->value.rows() % groups == 0 && k->value.rows() % groups == 0,
                "attention rows not divisible by group count");
  require_shape(k->value.rows() == v->value.rows(), "keys and values differ in length");
  const std::size_t lq = q->value.rows() / groups;
  const std::size_t lk = k->value.rows() / groups;
  require_shape(lk > 0, "attention over an empty sequence");
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[((g * heads + h) * lq + i) * lk + j]
  auto probs = std::make_shared<std::vector<double>>(groups * heads * lq * lk);
  Tensor out({groups * lq, d});
  const double* qv = q->value.ptr();
  const double* kv = k->value.ptr();
  const double* vv = v->value.ptr();
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < lq; ++i) {
        const double* qi = qv + (g * lq + i) * d + h * dh;
        double* p = probs->data() + ((g * heads + h) * lq + i) * lk;
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < lk; ++j) {
          const double* kj = kv + (g * lk + j) * d + h * dh;
          double s = 0.0;
          for (std::size_t e = 0; e < dh; ++e) s += qi[e] * kj[e];
          p[j] = s * scale;
          peak = std::max(peak, p[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < lk; ++j) {
          p[j] = std::exp(p[j] - peak);
          z += p[j];
        }
        double* oi = out.ptr() + (g * lq + i) * d + h * dh;
        for (std::size_t j = 0; j < lk; ++j) {
          p[j] /= z;
          const double* vj = vv + (g * lk + j) * d + h * dh;
          for (std::size_t e = 0; e < dh; ++e) oi[e] += p[j] * vj[e];
        }
      }
    }
  }
  return make_result(std::move(out), {q, k, v}, [=](Node& self) {
    const Var& qi_ = self.inputs[0];
    const Var& ki_ = self.inputs[1];
    const Var& vi_ = self.inputs[2];
    double* gq = qi_->requires_grad ? qi_->grad_buffer().ptr() : nullptr;
    double* gk = ki_->requires_grad ? ki_->grad_buffer().ptr() : nullptr;
    double* gv = vi_->requires_grad ? vi_->grad_buffer().ptr() : nullptr;
    const double* qd = qi_->value.ptr();
    const double* kd = ki_->value.ptr();
    const double* vd = vi_->value.ptr();
    const double* go = self.grad.ptr();
    std::vector<double> dp(lk);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < lq; ++i) {
          const double* p = probs->data() + ((g * heads + h) * lq + i) * lk;
          const double* goi = go + (g * lq + i) * d + h * dh;
          double dot = 0.0;
          for (std::size_t j = 0; j < lk; ++j) {
            const std::size_t row = (g * lk + j) * d + h * dh;
            double s = 0.0;
            for (std::size_t e = 0; e < dh; ++e) s += goi[e] * vd[row + e];
            dp[j] = s;
            dot += p[j] * s;
            if (gv) {
              for (std::size_t e = 0; e < dh; ++e) gv[row + e] += p[j] * goi[e];
            }
          }
          const std::size_t qrow = (g * lq + i) * d + h * dh;
          for (std::size_t j = 0; j < lk; ++j) {
            const double ds = p[j] * (dp[j] - dot) * scale;
            if (ds == 0.0) continue;
            const std::size_t krow = (g * lk + j) * d + h * dh;
            if (gq) {
              for (std::size_t e = 0; e < dh; ++e) gq[qrow + e] += ds * kd[krow + e];
            }
            if (gk) {
              for (std::size_t e = 0; e < dh; ++e) gk[krow + e] += ds * qd[qrow + e];
            }
          }
        }
      }
    }
  });
}

Var sum_row_groups(const Var& x, std::size_t group) {
  const std::size_t m = x->value.cols();
  require_shape(group > 0 && x->value.rows() % group == 0, "row count not divisible by group");
  const std::size_t n = x->value.rows() / group;
  Tensor out({n, m});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < group; ++k) {
      for (std::size_t c = 0; c < m; ++c) out[r * m + c] += x->value[(r * group + k) * m + c];
    }
  }
  return make_result(std::move(out), {x}, [n, m, group](Node& self) {
    Tensor& gx = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < group; ++k) {
        for (std::size_t c = 0; c < m; ++c) gx[(r * group + k) * m + c] += self.grad[r * m + c];
      }
    }
  });
}

Var reshape(const Var& x, std::vector<std::size_t> shape) {
  return make_result(x->value.reshaped(std::move(shape)), {x}, [](Node& self) {
    Tensor& gx = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Var weighted_log_prob(const Var& logits, std::span<const int> actions,
                      std::span<const double> weights) {
  const std::size_t b = logits->value.rows(), n = logits->value.cols();
  require_shape(actions.size() == b && weights.size() == b, "one action and weight per row");
  auto probs = std::make_shared<std::vector<double>>(b * n);
  std::vector<int> acts(actions.begin(), actions.end());
  std::vector<double> w(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    require_shape(acts[r] >= 0 && static_cast<std::size_t>(acts[r]) < n, "action out of range");
    const double* l = logits->value.ptr() + r * n;
    const double peak = *std::max_element(l, l + n);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) z += std::exp(l[c] - peak);
    const double lse = peak + std::log(z);
    for (std::size_t c = 0; c < n; ++c) (*probs)[r * n + c] = std::exp(l[c] - lse);
    total += w[r] * (l[acts[r]] - lse);
  }
  Tensor out({1}, std::vector<double>{total});
  return make_result(std::move(out), {logits}, [b, n, probs, acts, w](Node& self) {
    Tensor& g = self.inputs[0]->grad_buffer();
    const double seed = self.grad[0];
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double onehot = static_cast<int>(c) == acts[r] ? 1.0 : 0.0;
        g[r * n + c] += seed * w[r] * (onehot - (*probs)[r * n + c]);
      }
    }
  });
}

Var weighted_sum(const Var& x, std::span<const double> weights) {
  require_shape(weights.size() == x->value.size(), "one weight per element");
  std::vector<double> w(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] * x->value[i];
  return make_result(Tensor({1}, std::vector<double>{total}), {x}, [w](Node& self) {
    Tensor& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += self.grad[0] * w[i];
  });
}

}  // namespace qalloc::nn
