#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "grasp/nn/tensor.hpp"

// Raw layer kernels shared by the reverse-mode graph and the forward-mode (JVP) pass.
namespace grasp::nn::kernels {

inline int conv_out(int in, int kernel, int stride) { return (in - kernel) / stride + 1; }

// Fixed-order dot product with eight partial sums.
template <class T>
T dot(const T* a, const T* b, int n) {
  T lane[8] = {};
  int i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) lane[l] += a[i + l] * b[i + l];
  T acc = ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// y[i] += s * x[i]
template <class T>
void axpy(T s, const T* __restrict x, T* __restrict y, int n) {
  for (int i = 0; i < n; ++i) y[i] += s * x[i];
}

// y[B,out] (+)= x[B,in] * W[out,in]^T (+ b)
template <class T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b, Tensor<T>& y, bool accumulate = false) {
  const int batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  require_shape(w.dim(1) == in, "dense: weight expects " + std::to_string(w.dim(1)) + " inputs, got " +
                                    std::to_string(in));
  if (!accumulate) y = Tensor<T>({batch, out});
  for (int n = 0; n < batch; ++n) {
    const T* xr = x.ptr() + static_cast<std::size_t>(n) * in;
    T* yr = y.ptr() + static_cast<std::size_t>(n) * out;
    for (int o = 0; o < out; ++o) {
      const T* wr = w.ptr() + static_cast<std::size_t>(o) * in;
      yr[o] += (b ? (*b)[o] : T(0)) + dot(xr, wr, in);
    }
  }
}

template <class T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>* dw,
                    Tensor<T>* db) {
  const int batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  for (int n = 0; n < batch; ++n) {
    const T* xr = x.ptr() + static_cast<std::size_t>(n) * in;
    const T* gr = dy.ptr() + static_cast<std::size_t>(n) * out;
    T* dxr = dx ? dx->ptr() + static_cast<std::size_t>(n) * in : nullptr;
    for (int o = 0; o < out; ++o) {
      const T g = gr[o];
      if (g == T(0)) continue;
      if (db) (*db)[o] += g;
      if (dw) axpy(g, xr, dw->ptr() + static_cast<std::size_t>(o) * in, in);
      if (dxr) axpy(g, w.ptr() + static_cast<std::size_t>(o) * in, dxr, in);
    }
  }
}

// Patch matrix of one sample: cols[(c*K + ky)*K + kx, oy*Wo + ox] = x[c, oy*S + ky, ox*S + kx].
template <class T>
void im2col(const T* x, int ch, int h, int wd, int k, int stride, int ho, int wo, std::vector<T>& cols) {
  const int spatial = ho * wo;
  cols.resize(static_cast<std::size_t>(ch) * k * k * spatial);
  T* dst = cols.data();
  for (int c = 0; c < ch; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx)
        for (int oy = 0; oy < ho; ++oy) {
          const T* src = x + (static_cast<std::size_t>(c) * h + oy * stride + ky) * wd + kx;
          for (int ox = 0; ox < wo; ++ox) *dst++ = src[ox * stride];
        }
}

// Valid (unpadded) strided convolution. x[B,C,H,W], w[F,C,K,K], b[F] -> y[B,F,Ho,Wo].
template <class T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b, int stride, Tensor<T>& y,
                    bool accumulate = false) {
  require_shape(x.rank() == 4 && w.rank() == 4, "conv2d expects rank-4 input and weight");
  const int batch = x.dim(0), ch = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int filters = w.dim(0), k = w.dim(2);
  require_shape(w.dim(1) == ch && w.dim(3) == k, "conv2d: weight " + shape_string(w.shape) +
                                                      " does not fit input " + shape_string(x.shape));
  const int ho = conv_out(h, k, stride), wo = conv_out(wd, k, stride);
  require_shape(ho >= 1 && wo >= 1, "conv2d: kernel larger than input");
  if (!accumulate) y = Tensor<T>({batch, filters, ho, wo});
  const int spatial = ho * wo, rows = ch * k * k;
  std::vector<T> cols, acc(spatial);
  for (int n = 0; n < batch; ++n) {
    im2col(x.ptr() + static_cast<std::size_t>(n) * ch * h * wd, ch, h, wd, k, stride, ho, wo, cols);
    for (int f = 0; f < filters; ++f) {
      std::fill(acc.begin(), acc.end(), b ? (*b)[f] : T(0));
      const T* wf = w.ptr() + static_cast<std::size_t>(f) * rows;
      for (int r = 0; r < rows; ++r) axpy(wf[r], cols.data() + static_cast<std::size_t>(r) * spatial, acc.data(), spatial);
      T* yp = y.ptr() + (static_cast<std::size_t>(n) * filters + f) * spatial;
      for (int s = 0; s < spatial; ++s) yp[s] += acc[s];
    }
  }
}

template <class T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int stride, const Tensor<T>& dy, Tensor<T>* dx,
                     Tensor<T>* dw, Tensor<T>* db) {
  const int batch = x.dim(0), ch = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int filters = w.dim(0), k = w.dim(2);
  const int ho = dy.dim(2), wo = dy.dim(3);
  const int spatial = ho * wo, rows = ch * k * k;
  std::vector<T> cols, dcols;
  for (int n = 0; n < batch; ++n) {
    const T* xn = x.ptr() + static_cast<std::size_t>(n) * ch * h * wd;
    if (dw) im2col(xn, ch, h, wd, k, stride, ho, wo, cols);
    if (dx) dcols.assign(static_cast<std::size_t>(rows) * spatial, T(0));
    for (int f = 0; f < filters; ++f) {
      const T* gf = dy.ptr() + (static_cast<std::size_t>(n) * filters + f) * spatial;
      if (db)
        for (int s = 0; s < spatial; ++s) (*db)[f] += gf[s];
      const std::size_t woff = static_cast<std::size_t>(f) * rows;
      for (int r = 0; r < rows; ++r) {
        if (dw) (*dw)[woff + r] += dot(gf, cols.data() + static_cast<std::size_t>(r) * spatial, spatial);
        if (dx) axpy(w[woff + r], gf, dcols.data() + static_cast<std::size_t>(r) * spatial, spatial);
      }
    }
    if (!dx) continue;
    T* dxn = dx->ptr() + static_cast<std::size_t>(n) * ch * h * wd;
    const T* src = dcols.data();
    for (int c = 0; c < ch; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          for (int oy = 0; oy < ho; ++oy) {
            T* dst = dxn + (static_cast<std::size_t>(c) * h + oy * stride + ky) * wd + kx;
            for (int ox = 0; ox < wo; ++ox) dst[ox * stride] += *src++;
          }
  }
}

}  // namespace grasp::nn::kernels
