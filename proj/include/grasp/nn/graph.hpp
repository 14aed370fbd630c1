#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "grasp/nn/kernels.hpp"
#include "grasp/nn/tensor.hpp"

namespace grasp::nn {

struct Var {
  int id = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order; backward() walks them in reverse and
// accumulates parameter gradients into the ParameterSet the parameters were read from.
template <class T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor<T> value) { return push(std::move(value), false, nullptr); }

  Var param(ParameterSet<T>& params, const std::string& name) {
    auto& e = params.entry(name);
    const Var v = push(e.value, true, nullptr);
    nodes_[v.id].param_grad = &e.grad;
    return v;
  }

  const Tensor<T>& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor<T>& grad(Var v) const { return nodes_.at(v.id).grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root) = 1; root must hold a single value.
  void backward(Var root) {
    require_shape(value(root).size() == 1, "backward() without a seed needs a scalar root");
    backward(root, Tensor<T>(value(root).shape, T(1)));
  }

  void backward(Var root, const Tensor<T>& seed) {
    require_shape(seed.shape == value(root).shape, "backward seed shape mismatch");
    for (auto& n : nodes_)
      if (n.needs_grad) n.grad = Tensor<T>(n.value.shape);
    if (!nodes_[root.id].needs_grad) return;
    nodes_[root.id].grad = seed;
    for (int i = root.id; i >= 0; --i) {
      auto& n = nodes_[i];
      if (!n.needs_grad) continue;
      if (n.back) n.back();
      if (n.param_grad) {
        auto& dst = *n.param_grad;
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
      }
    }
  }

  // ---- layers -------------------------------------------------------------------------------

  Var dense(Var x, Var w, Var b) {
    Tensor<T> y;
    kernels::dense_forward(value(x), value(w), &value(b), y);
    return push(std::move(y), needs(x, w, b), [this, x, w, b, id = next_id()] {
      kernels::dense_backward(value(x), value(w), node(id).grad, grad_ptr(x), grad_ptr(w), grad_ptr(b));
    });
  }

  Var conv2d(Var x, Var w, Var b, int stride) {
    Tensor<T> y;
    kernels::conv2d_forward(value(x), value(w), &value(b), stride, y);
    return push(std::move(y), needs(x, w, b), [this, x, w, b, stride, id = next_id()] {
      kernels::conv2d_backward(value(x), value(w), stride, node(id).grad, grad_ptr(x), grad_ptr(w), grad_ptr(b));
    });
  }

  Var flatten(Var x) {
    const auto& v = value(x);
    Tensor<T> y({v.dim(0), static_cast<int>(v.size() / static_cast<std::size_t>(v.dim(0)))}, v.data);
    return push(std::move(y), needs(x), [this, x, id = next_id()] { add_into(x, node(id).grad.data); });
  }

  Var concat_cols(Var a, Var b) {
    const auto& va = value(a);
    const auto& vb = value(b);
    require_shape(va.rank() == 2 && vb.rank() == 2 && va.dim(0) == vb.dim(0), "concat_cols needs [B,n] and [B,m]");
    const int rows = va.dim(0), na = va.dim(1), nb = vb.dim(1);
    Tensor<T> y({rows, na + nb});
    for (int r = 0; r < rows; ++r) {
      std::copy_n(va.ptr() + r * na, na, y.ptr() + r * (na + nb));
      std::copy_n(vb.ptr() + r * nb, nb, y.ptr() + r * (na + nb) + na);
    }
    return push(std::move(y), needs(a, b), [this, a, b, rows, na, nb, id = next_id()] {
      const auto& g = node(id).grad;
      if (auto* ga = grad_ptr(a))
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < na; ++j) (*ga)[r * na + j] += g[r * (na + nb) + j];
      if (auto* gb = grad_ptr(b))
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < nb; ++j) (*gb)[r * nb + j] += g[r * (na + nb) + na + j];
    });
  }

  // ---- elementwise --------------------------------------------------------------------------

  Var relu(Var x) {
    return unary(x, [](T v) { return v > T(0) ? v : T(0); },
                 [](T in, T, T g) { return in > T(0) ? g : T(0); });
  }
  Var tanh(Var x) {
    return unary(x, [](T v) { return std::tanh(v); }, [](T, T out, T g) { return g * (T(1) - out * out); });
  }
  Var exp(Var x) {
    return unary(x, [](T v) { return std::exp(v); }, [](T, T out, T g) { return g * out; });
  }
  Var square(Var x) {
    return unary(x, [](T v) { return v * v; }, [](T in, T, T g) { return g * T(2) * in; });
  }
  Var scale(Var x, T s) {
    return unary(x, [s](T v) { return v * s; }, [s](T, T, T g) { return g * s; });
  }
  Var add_scalar(Var x, T s) {
    return unary(x, [s](T v) { return v + s; }, [](T, T, T g) { return g; });
  }
  // Gradient passes only strictly inside (lo, hi).
  Var clip(Var x, T lo, T hi) {
    return unary(x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
                 [lo, hi](T in, T, T g) { return (in > lo && in < hi) ? g : T(0); });
  }

  Var add(Var a, Var b) {
    return binary(a, b, [](T x, T y) { return x + y; }, [](T, T, T g) { return g; }, [](T, T, T g) { return g; });
  }
  Var sub(Var a, Var b) {
    return binary(a, b, [](T x, T y) { return x - y; }, [](T, T, T g) { return g; }, [](T, T, T g) { return -g; });
  }
  Var mul(Var a, Var b) {
    return binary(a, b, [](T x, T y) { return x * y; }, [](T, T y, T g) { return g * y; },
                  [](T x, T, T g) { return g * x; });
  }
  // Ties send the gradient to `a`.
  Var minimum(Var a, Var b) {
    return binary(a, b, [](T x, T y) { return x <= y ? x : y; }, [](T x, T y, T g) { return x <= y ? g : T(0); },
                  [](T x, T y, T g) { return x <= y ? T(0) : g; });
  }

  // x[B,n] + v[n] broadcast over rows.
  Var add_row(Var x, Var v) {
    const auto& vx = value(x);
    const auto& vv = value(v);
    require_shape(vx.rank() == 2 && vv.size() == static_cast<std::size_t>(vx.dim(1)), "add_row needs [B,n] + [n]");
    Tensor<T> y = vx;
    const int rows = vx.dim(0), cols = vx.dim(1);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) y[r * cols + c] += vv[c];
    return push(std::move(y), needs(x, v), [this, x, v, rows, cols, id = next_id()] {
      const auto& g = node(id).grad;
      add_into(x, g.data);
      if (auto* gv = grad_ptr(v))
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) (*gv)[c] += g[r * cols + c];
    });
  }

  // ---- reductions ---------------------------------------------------------------------------

  Var sum(Var x) {
    T acc = T(0);
    for (T v : value(x).data) acc += v;
    return push(Tensor<T>({1}, {acc}), needs(x), [this, x, id = next_id()] {
      if (auto* gx = grad_ptr(x)) {
        const T g = node(id).grad[0];
        for (auto& d : gx->data) d += g;
      }
    });
  }

  Var mean(Var x) { return scale(sum(x), T(1) / static_cast<T>(value(x).size())); }

  // ---- diagonal Gaussian --------------------------------------------------------------------

  // Per-row log density of `actions` [B,d] under N(mean [B,d], diag(exp(log_std [d]))^2).
  Var gaussian_log_prob(const Tensor<T>& actions, Var mean, Var log_std) {
    const auto& m = value(mean);
    const auto& ls = value(log_std);
    require_shape(m.rank() == 2 && actions.shape == m.shape && ls.size() == static_cast<std::size_t>(m.dim(1)),
                  "gaussian_log_prob shapes disagree");
    const int rows = m.dim(0), d = m.dim(1);
    const T half_log_2pi = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi));
    Tensor<T> y({rows});
    for (int r = 0; r < rows; ++r) {
      T acc = T(0);
      for (int j = 0; j < d; ++j) {
        const T z = (actions[r * d + j] - m[r * d + j]) / std::exp(ls[j]);
        acc += T(-0.5) * z * z - ls[j] - half_log_2pi;
      }
      y[r] = acc;
    }
    return push(std::move(y), needs(mean, log_std), [this, actions, mean, log_std, rows, d, id = next_id()] {
      const auto& g = node(id).grad;
      const auto& m = value(mean);
      const auto& ls = value(log_std);
      auto* gm = grad_ptr(mean);
      auto* gls = grad_ptr(log_std);
      for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < d; ++j) {
          const T inv_std = std::exp(-ls[j]);
          const T z = (actions[r * d + j] - m[r * d + j]) * inv_std;
          if (gm) (*gm)[r * d + j] += g[r] * z * inv_std;
          if (gls) (*gls)[j] += g[r] * (z * z - T(1));
        }
      }
    });
  }

  // Entropy of the diagonal Gaussian: sum_j (0.5 ln(2 pi e) + log_std_j).
  Var gaussian_entropy(Var log_std) {
    const auto& ls = value(log_std);
    const T c = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e));
    T acc = T(0);
    for (T v : ls.data) acc += c + v;
    return push(Tensor<T>({1}, {acc}), needs(log_std), [this, log_std, id = next_id()] {
      if (auto* g = grad_ptr(log_std))
        for (auto& v : g->data) v += node(id).grad[0];
    });
  }

  // Per-row KL(old || new) between diagonal Gaussians; old parameters are constants.
  Var gaussian_kl(const Tensor<T>& old_mean, const Tensor<T>& old_log_std, Var mean, Var log_std) {
    const auto& m = value(mean);
    const auto& ls = value(log_std);
    require_shape(m.rank() == 2 && old_mean.shape == m.shape && old_log_std.size() == ls.size() &&
                      ls.size() == static_cast<std::size_t>(m.dim(1)),
                  "gaussian_kl shapes disagree");
    const int rows = m.dim(0), d = m.dim(1);
    Tensor<T> y({rows});
    for (int r = 0; r < rows; ++r) {
      T acc = T(0);
      for (int j = 0; j < d; ++j) {
        const T var_old = std::exp(T(2) * old_log_std[j]);
        const T var_new = std::exp(T(2) * ls[j]);
        const T dm = old_mean[r * d + j] - m[r * d + j];
        acc += ls[j] - old_log_std[j] + (var_old + dm * dm) / (T(2) * var_new) - T(0.5);
      }
      y[r] = acc;
    }
    return push(std::move(y), needs(mean, log_std), [this, old_mean, old_log_std, mean, log_std, rows, d,
                                                     id = next_id()] {
      const auto& g = node(id).grad;
      const auto& m = value(mean);
      const auto& ls = value(log_std);
      auto* gm = grad_ptr(mean);
      auto* gls = grad_ptr(log_std);
      for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < d; ++j) {
          const T var_old = std::exp(T(2) * old_log_std[j]);
          const T var_new = std::exp(T(2) * ls[j]);
          const T dm = old_mean[r * d + j] - m[r * d + j];
          if (gm) (*gm)[r * d + j] += g[r] * (-dm / var_new);
          if (gls) (*gls)[j] += g[r] * (T(1) - (var_old + dm * dm) / var_new);
        }
      }
    });
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::function<void()> back;
    Tensor<T>* param_grad = nullptr;
    bool needs_grad = false;
  };

  int next_id() const { return static_cast<int>(nodes_.size()); }
  Node& node(int id) { return nodes_[id]; }

  Var push(Tensor<T> value, bool needs_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  template <class... Vs>
  bool needs(Vs... vs) const {
    return (nodes_.at(vs.id).needs_grad || ...);
  }

  Tensor<T>* grad_ptr(Var v) { return nodes_[v.id].needs_grad ? &nodes_[v.id].grad : nullptr; }

  void add_into(Var v, const std::vector<T>& g) {
    if (auto* dst = grad_ptr(v))
      for (std::size_t k = 0; k < g.size(); ++k) (*dst)[k] += g[k];
  }

  template <class F, class DF>
  Var unary(Var x, F f, DF df) {
    const auto& vx = value(x);
    Tensor<T> y(vx.shape);
    for (std::size_t k = 0; k < vx.size(); ++k) y[k] = f(vx[k]);
    return push(std::move(y), needs(x), [this, x, df, id = next_id()] {
      auto* gx = grad_ptr(x);
      if (!gx) return;
      const auto& in = value(x);
      const auto& out = node(id).value;
      const auto& g = node(id).grad;
      for (std::size_t k = 0; k < in.size(); ++k) (*gx)[k] += df(in[k], out[k], g[k]);
    });
  }

  template <class F, class DA, class DB>
  Var binary(Var a, Var b, F f, DA da, DB db) {
    const auto& va = value(a);
    const auto& vb = value(b);
    require_shape(va.shape == vb.shape, "elementwise op on " + shape_string(va.shape) + " vs " + shape_string(vb.shape));
    Tensor<T> y(va.shape);
    for (std::size_t k = 0; k < va.size(); ++k) y[k] = f(va[k], vb[k]);
    return push(std::move(y), needs(a, b), [this, a, b, da, db, id = next_id()] {
      const auto& xa = value(a);
      const auto& xb = value(b);
      const auto& g = node(id).grad;
      if (auto* ga = grad_ptr(a))
        for (std::size_t k = 0; k < g.size(); ++k) (*ga)[k] += da(xa[k], xb[k], g[k]);
      if (auto* gb = grad_ptr(b))
        for (std::size_t k = 0; k < g.size(); ++k) (*gb)[k] += db(xa[k], xb[k], g[k]);
    });
  }

  std::vector<Node> nodes_;
};

}  // namespace grasp::nn
