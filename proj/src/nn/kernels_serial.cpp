#include <algorithm>

#include <cmath>

#include "rcids/nn/kernels.hpp"

// Reference kernels: the operation contracts written as the most direct
// loops possible. Single-threaded, no layout tricks. The fast family is
// tested for bit-identical output against these.

namespace rcids {

ConvShape conv_geometry(size_t batch, size_t in_h, size_t in_w, size_t in_c, size_t k_h,
                        size_t k_w, size_t out_c, size_t stride) {
  ConvShape s;
  s.batch = batch;
  s.in_h = in_h;
  s.in_w = in_w;
  s.in_c = in_c;
  s.k_h = k_h;
  s.k_w = k_w;
  s.out_c = out_c;
  s.stride = stride;
  s.out_h = (in_h + stride - 1) / stride;  // ceil(in/stride)
  s.out_w = (in_w + stride - 1) / stride;
  // "same" padding; when the total is odd the extra row/column goes to the
  // bottom/right, so pad_top/pad_left take the floor half.
  size_t pad_h = std::max<size_t>((s.out_h - 1) * stride + k_h, in_h) - in_h;
  size_t pad_w = std::max<size_t>((s.out_w - 1) * stride + k_w, in_w) - in_w;
  s.pad_top = pad_h / 2;
  s.pad_left = pad_w / 2;
  return s;
}

namespace kernels::ref {

template <typename Real>
void conv2d_forward(const Real* x, const Real* w, const Real* bias, Real* y,
                    const ConvShape& s) {
  for (size_t b = 0; b < s.batch; ++b)
    for (size_t oy = 0; oy < s.out_h; ++oy)
      for (size_t ox = 0; ox < s.out_w; ++ox)
        for (size_t oc = 0; oc < s.out_c; ++oc) {
          Real acc = bias[oc];
          for (size_t ky = 0; ky < s.k_h; ++ky)
            for (size_t kx = 0; kx < s.k_w; ++kx) {
              // padded coordinates; out-of-bounds taps contribute zero
              size_t iy = oy * s.stride + ky;
              size_t ix = ox * s.stride + kx;
              if (iy < s.pad_top || ix < s.pad_left) continue;
              iy -= s.pad_top;
              ix -= s.pad_left;
              if (iy >= s.in_h || ix >= s.in_w) continue;
              for (size_t ic = 0; ic < s.in_c; ++ic)
                acc = std::fma(x[((b * s.in_h + iy) * s.in_w + ix) * s.in_c + ic],
                               w[((ky * s.k_w + kx) * s.in_c + ic) * s.out_c + oc], acc);
            }
          y[((b * s.out_h + oy) * s.out_w + ox) * s.out_c + oc] = acc;
        }
}

template <typename Real>
void conv2d_backward_input(const Real* dy, const Real* w, Real* dx, const ConvShape& s) {
  for (size_t b = 0; b < s.batch; ++b)
    for (size_t iy = 0; iy < s.in_h; ++iy)
      for (size_t ix = 0; ix < s.in_w; ++ix)
        for (size_t ic = 0; ic < s.in_c; ++ic) {
          Real acc = 0;
          for (size_t ky = 0; ky < s.k_h; ++ky)
            for (size_t kx = 0; kx < s.k_w; ++kx) {
              size_t py = iy + s.pad_top;   // padded position this tap writes
              size_t px = ix + s.pad_left;
              if (py < ky || px < kx) continue;
              if ((py - ky) % s.stride || (px - kx) % s.stride) continue;
              size_t oy = (py - ky) / s.stride;
              size_t ox = (px - kx) / s.stride;
              if (oy >= s.out_h || ox >= s.out_w) continue;
              for (size_t oc = 0; oc < s.out_c; ++oc)
                acc = std::fma(dy[((b * s.out_h + oy) * s.out_w + ox) * s.out_c + oc],
                             w[((ky * s.k_w + kx) * s.in_c + ic) * s.out_c + oc], acc);
            }
          dx[((b * s.in_h + iy) * s.in_w + ix) * s.in_c + ic] = acc;
        }
}

template <typename Real>
void conv2d_backward_params(const Real* x, const Real* dy, Real* dw, Real* db,
                            const ConvShape& s) {
  for (size_t ky = 0; ky < s.k_h; ++ky)
    for (size_t kx = 0; kx < s.k_w; ++kx)
      for (size_t ic = 0; ic < s.in_c; ++ic)
        for (size_t oc = 0; oc < s.out_c; ++oc) {
          Real acc = 0;
          for (size_t b = 0; b < s.batch; ++b)
            for (size_t oy = 0; oy < s.out_h; ++oy)
              for (size_t ox = 0; ox < s.out_w; ++ox) {
                size_t iy = oy * s.stride + ky;
                size_t ix = ox * s.stride + kx;
                if (iy < s.pad_top || ix < s.pad_left) continue;
                iy -= s.pad_top;
                ix -= s.pad_left;
                if (iy >= s.in_h || ix >= s.in_w) continue;
                acc = std::fma(x[((b * s.in_h + iy) * s.in_w + ix) * s.in_c + ic],
                               dy[((b * s.out_h + oy) * s.out_w + ox) * s.out_c + oc], acc);
              }
          dw[((ky * s.k_w + kx) * s.in_c + ic) * s.out_c + oc] = acc;
        }
  for (size_t oc = 0; oc < s.out_c; ++oc) {
    Real acc = 0;
    for (size_t b = 0; b < s.batch; ++b)
      for (size_t oy = 0; oy < s.out_h; ++oy)
        for (size_t ox = 0; ox < s.out_w; ++ox)
          acc += dy[((b * s.out_h + oy) * s.out_w + ox) * s.out_c + oc];
    db[oc] = acc;
  }
}

template <typename Real>
void dense_forward(const Real* x, const Real* w, const Real* bias, Real* y, size_t batch,
                   size_t in, size_t out) {
  // weights are input-major [in, out]: w[n*out + m]
  for (size_t b = 0; b < batch; ++b)
    for (size_t m = 0; m < out; ++m) {
      Real acc = bias[m];
      for (size_t n = 0; n < in; ++n) acc = std::fma(x[b * in + n], w[n * out + m], acc);
      y[b * out + m] = acc;
    }
}

template <typename Real>
void dense_backward_input(const Real* dy, const Real* w, Real* dx, size_t batch, size_t in,
                          size_t out) {
  for (size_t b = 0; b < batch; ++b)
    for (size_t n = 0; n < in; ++n) {
      Real acc = 0;
      for (size_t m = 0; m < out; ++m) acc = std::fma(dy[b * out + m], w[n * out + m], acc);
      dx[b * in + n] = acc;
    }
}

template <typename Real>
void dense_backward_params(const Real* x, const Real* dy, Real* dw, Real* db, size_t batch,
                           size_t in, size_t out) {
  for (size_t n = 0; n < in; ++n)
    for (size_t m = 0; m < out; ++m) {
      Real acc = 0;
      for (size_t b = 0; b < batch; ++b) acc = std::fma(x[b * in + n], dy[b * out + m], acc);
      dw[n * out + m] = acc;
    }
  for (size_t m = 0; m < out; ++m) {
    Real acc = 0;
    for (size_t b = 0; b < batch; ++b) acc += dy[b * out + m];
    db[m] = acc;
  }
}

template <typename Real>
void relu_forward(const Real* x, Real* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > Real(0) ? x[i] : Real(0);
}

template <typename Real>
void relu_backward(const Real* x, const Real* dy, Real* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) dx[i] = x[i] > Real(0) ? dy[i] : Real(0);
}

template <typename Real>
void dropout_forward(const Real* x, const uint8_t* mask, Real keep_prob, Real* y, size_t n) {
  // inverted dropout: survivors are scaled up so eval needs no rescaling
  for (size_t i = 0; i < n; ++i) y[i] = mask[i] ? x[i] / keep_prob : Real(0);
}

template <typename Real>
void dropout_backward(const Real* dy, const uint8_t* mask, Real keep_prob, Real* dx, size_t n) {
  for (size_t i = 0; i < n; ++i) dx[i] = mask[i] ? dy[i] / keep_prob : Real(0);
}

#define RCIDS_INSTANTIATE_REF(Real)                                                            \
  template void conv2d_forward<Real>(const Real*, const Real*, const Real*, Real*,             \
                                     const ConvShape&);                                        \
  template void conv2d_backward_input<Real>(const Real*, const Real*, Real*,                   \
                                            const ConvShape&);                                 \
  template void conv2d_backward_params<Real>(const Real*, const Real*, Real*, Real*,           \
                                             const ConvShape&);                                \
  template void dense_forward<Real>(const Real*, const Real*, const Real*, Real*, size_t,      \
                                    size_t, size_t);                                           \
  template void dense_backward_input<Real>(const Real*, const Real*, Real*, size_t, size_t,    \
                                           size_t);                                            \
  template void dense_backward_params<Real>(const Real*, const Real*, Real*, Real*, size_t,    \
                                            size_t, size_t);                                   \
  template void relu_forward<Real>(const Real*, Real*, size_t);                                \
  template void relu_backward<Real>(const Real*, const Real*, Real*, size_t);                  \
  template void dropout_forward<Real>(const Real*, const uint8_t*, Real, Real*, size_t);       \
  template void dropout_backward<Real>(const Real*, const uint8_t*, Real, Real*, size_t);

RCIDS_INSTANTIATE_REF(float)
RCIDS_INSTANTIATE_REF(double)

}  // namespace kernels::ref

}  // namespace rcids
