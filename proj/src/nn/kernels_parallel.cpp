#include <omp.h>

#include <vector>

#include <cmath>

#include "rcids/nn/kernels.hpp"

// Fast kernels: cache-aware loop order plus OpenMP. Two rules keep them
// bit-identical to the ref family at any thread count:
//   1. every output element is owned by exactly one thread (gather form,
//      no shared accumulators, no atomics), and
//   2. the additions feeding one element happen in the same order as in ref.
// Zero input terms are skipped — x*0 contributes +/-0, which never changes
// a round-to-nearest accumulation — so ReLU- and dropout-sparse activations
// cost proportionally less.

namespace rcids::kernels::fast {

template <typename Real>
void conv2d_forward(const Real* x, const Real* w, const Real* bias, Real* y,
                    const ConvShape& s) {
  const ptrdiff_t rows = static_cast<ptrdiff_t>(s.batch * s.out_h);
#pragma omp parallel
  {
    std::vector<Real> acc(s.out_c);
#pragma omp for
    for (ptrdiff_t row = 0; row < rows; ++row) {
      const size_t b = static_cast<size_t>(row) / s.out_h;
      const size_t oy = static_cast<size_t>(row) % s.out_h;
      for (size_t ox = 0; ox < s.out_w; ++ox) {
        for (size_t oc = 0; oc < s.out_c; ++oc) acc[oc] = bias[oc];
        for (size_t ky = 0; ky < s.k_h; ++ky)
          for (size_t kx = 0; kx < s.k_w; ++kx) {
            size_t iy = oy * s.stride + ky;
            size_t ix = ox * s.stride + kx;
            if (iy < s.pad_top || ix < s.pad_left) continue;
            iy -= s.pad_top;
            ix -= s.pad_left;
            if (iy >= s.in_h || ix >= s.in_w) continue;
            const Real* __restrict xr = x + ((b * s.in_h + iy) * s.in_w + ix) * s.in_c;
            const Real* __restrict wr = w + (ky * s.k_w + kx) * s.in_c * s.out_c;
            for (size_t ic = 0; ic < s.in_c; ++ic) {
              const Real sv = xr[ic];
              if (sv == Real(0)) continue;
              const Real* __restrict wl = wr + ic * s.out_c;
              Real* __restrict al = acc.data();
              for (size_t oc = 0; oc < s.out_c; ++oc) al[oc] = std::fma(sv, wl[oc], al[oc]);
            }
          }
        Real* __restrict yr = y + ((b * s.out_h + oy) * s.out_w + ox) * s.out_c;
        for (size_t oc = 0; oc < s.out_c; ++oc) yr[oc] = acc[oc];
      }
    }
  }
}

template <typename Real>
void conv2d_backward_input(const Real* dy, const Real* w, Real* dx, const ConvShape& s) {
  // Transposed kernel copy so the innermost update is contiguous over in_c.
  std::vector<Real> wt(s.k_h * s.k_w * s.out_c * s.in_c);
  for (size_t ky = 0; ky < s.k_h; ++ky)
    for (size_t kx = 0; kx < s.k_w; ++kx)
      for (size_t ic = 0; ic < s.in_c; ++ic)
        for (size_t oc = 0; oc < s.out_c; ++oc)
          wt[((ky * s.k_w + kx) * s.out_c + oc) * s.in_c + ic] =
              w[((ky * s.k_w + kx) * s.in_c + ic) * s.out_c + oc];

  const ptrdiff_t rows = static_cast<ptrdiff_t>(s.batch * s.in_h);
#pragma omp parallel
  {
    std::vector<Real> acc(s.in_c);
#pragma omp for
    for (ptrdiff_t row = 0; row < rows; ++row) {
      const size_t b = static_cast<size_t>(row) / s.in_h;
      const size_t iy = static_cast<size_t>(row) % s.in_h;
      for (size_t ix = 0; ix < s.in_w; ++ix) {
        for (size_t ic = 0; ic < s.in_c; ++ic) acc[ic] = 0;
        for (size_t ky = 0; ky < s.k_h; ++ky)
          for (size_t kx = 0; kx < s.k_w; ++kx) {
            size_t py = iy + s.pad_top;
            size_t px = ix + s.pad_left;
            if (py < ky || px < kx) continue;
            if ((py - ky) % s.stride || (px - kx) % s.stride) continue;
            size_t oy = (py - ky) / s.stride;
            size_t ox = (px - kx) / s.stride;
            if (oy >= s.out_h || ox >= s.out_w) continue;
            const Real* __restrict gr = dy + ((b * s.out_h + oy) * s.out_w + ox) * s.out_c;
            const Real* __restrict wr = wt.data() + (ky * s.k_w + kx) * s.out_c * s.in_c;
            for (size_t oc = 0; oc < s.out_c; ++oc) {
              const Real sv = gr[oc];
              if (sv == Real(0)) continue;
              const Real* __restrict wl = wr + oc * s.in_c;
              Real* __restrict al = acc.data();
              for (size_t ic = 0; ic < s.in_c; ++ic) al[ic] = std::fma(sv, wl[ic], al[ic]);
            }
          }
        Real* __restrict dxr = dx + ((b * s.in_h + iy) * s.in_w + ix) * s.in_c;
        for (size_t ic = 0; ic < s.in_c; ++ic) dxr[ic] = acc[ic];
      }
    }
  }
}

template <typename Real>
void conv2d_backward_params(const Real* x, const Real* dy, Real* dw, Real* db,
                            const ConvShape& s) {
  const ptrdiff_t taps = static_cast<ptrdiff_t>(s.k_h * s.k_w * s.in_c);
#pragma omp parallel for
  for (ptrdiff_t tap = 0; tap < taps; ++tap) {
    const size_t ky = static_cast<size_t>(tap) / (s.k_w * s.in_c);
    const size_t kx = static_cast<size_t>(tap) / s.in_c % s.k_w;
    const size_t ic = static_cast<size_t>(tap) % s.in_c;
    Real* __restrict dwr = dw + static_cast<size_t>(tap) * s.out_c;
    for (size_t oc = 0; oc < s.out_c; ++oc) dwr[oc] = 0;
    for (size_t b = 0; b < s.batch; ++b)
      for (size_t oy = 0; oy < s.out_h; ++oy)
        for (size_t ox = 0; ox < s.out_w; ++ox) {
          size_t iy = oy * s.stride + ky;
          size_t ix = ox * s.stride + kx;
          if (iy < s.pad_top || ix < s.pad_left) continue;
          iy -= s.pad_top;
          ix -= s.pad_left;
          if (iy >= s.in_h || ix >= s.in_w) continue;
          const Real sv = x[((b * s.in_h + iy) * s.in_w + ix) * s.in_c + ic];
          if (sv == Real(0)) continue;
          const Real* __restrict gr = dy + ((b * s.out_h + oy) * s.out_w + ox) * s.out_c;
          for (size_t oc = 0; oc < s.out_c; ++oc) dwr[oc] = std::fma(sv, gr[oc], dwr[oc]);
        }
  }
#pragma omp parallel for
  for (ptrdiff_t oc = 0; oc < static_cast<ptrdiff_t>(s.out_c); ++oc) {
    Real acc = 0;
    const size_t spatial = s.out_h * s.out_w;
    for (size_t i = 0; i < s.batch * spatial; ++i)
      acc += dy[i * s.out_c + static_cast<size_t>(oc)];
    db[oc] = acc;
  }
}

template <typename Real>
void dense_forward(const Real* x, const Real* w, const Real* bias, Real* y, size_t batch,
                   size_t in, size_t out) {
  // Column bands: each thread owns y[:, m0..m1) and streams the weight rows
  // once. The b loop sits inside n so the whole y block stays cache-resident.
#pragma omp parallel
  {
    const size_t nt = static_cast<size_t>(omp_get_num_threads());
    const size_t tid = static_cast<size_t>(omp_get_thread_num());
    const size_t m0 = out * tid / nt;
    const size_t m1 = out * (tid + 1) / nt;
    if (m0 < m1) {
      for (size_t b = 0; b < batch; ++b) {
        Real* __restrict yr = y + b * out;
        for (size_t m = m0; m < m1; ++m) yr[m] = bias[m];
      }
      for (size_t n = 0; n < in; ++n) {
        const Real* __restrict wr = w + n * out;
        for (size_t b = 0; b < batch; ++b) {
          const Real sv = x[b * in + n];
          if (sv == Real(0)) continue;
          Real* __restrict yr = y + b * out;
          for (size_t m = m0; m < m1; ++m) yr[m] = std::fma(sv, wr[m], yr[m]);
        }
      }
    }
  }
}

namespace {

// Cache-blocked transpose of the dense weight matrix [in, out] -> [out, in].
// The buffer is reused across calls; training calls this once per batch.
template <typename Real>
std::vector<Real>& transposed_weights(const Real* w, size_t in, size_t out) {
  static thread_local std::vector<Real> wt;
  wt.resize(in * out);
  constexpr size_t kBlock = 64;
#pragma omp parallel for
  for (ptrdiff_t nb = 0; nb < static_cast<ptrdiff_t>((in + kBlock - 1) / kBlock); ++nb) {
    const size_t n0 = static_cast<size_t>(nb) * kBlock;
    const size_t n1 = std::min(n0 + kBlock, in);
    for (size_t m0 = 0; m0 < out; m0 += kBlock) {
      const size_t m1 = std::min(m0 + kBlock, out);
      for (size_t n = n0; n < n1; ++n)
        for (size_t m = m0; m < m1; ++m) wt[m * in + n] = w[n * out + m];
    }
  }
  return wt;
}

}  // namespace

template <typename Real>
void dense_backward_input(const Real* dy, const Real* w, Real* dx, size_t batch, size_t in,
                          size_t out) {
  const std::vector<Real>& wt = transposed_weights(w, in, out);
#pragma omp parallel for
  for (ptrdiff_t b = 0; b < static_cast<ptrdiff_t>(batch); ++b) {
    Real* __restrict dxr = dx + static_cast<size_t>(b) * in;
    for (size_t n = 0; n < in; ++n) dxr[n] = 0;
    for (size_t m = 0; m < out; ++m) {
      const Real sv = dy[static_cast<size_t>(b) * out + m];
      if (sv == Real(0)) continue;
      const Real* __restrict wr = wt.data() + m * in;
      for (size_t n = 0; n < in; ++n) dxr[n] = std::fma(sv, wr[n], dxr[n]);
    }
  }
}

template <typename Real>
void dense_backward_params(const Real* x, const Real* dy, Real* dw, Real* db, size_t batch,
                           size_t in, size_t out) {
#pragma omp parallel for
  for (ptrdiff_t n = 0; n < static_cast<ptrdiff_t>(in); ++n) {
    Real* __restrict dwr = dw + static_cast<size_t>(n) * out;
    for (size_t m = 0; m < out; ++m) dwr[m] = 0;
    for (size_t b = 0; b < batch; ++b) {
      const Real sv = x[b * in + static_cast<size_t>(n)];
      if (sv == Real(0)) continue;
      const Real* __restrict gr = dy + b * out;
      for (size_t m = 0; m < out; ++m) dwr[m] = std::fma(sv, gr[m], dwr[m]);
    }
  }
#pragma omp parallel for
  for (ptrdiff_t m = 0; m < static_cast<ptrdiff_t>(out); ++m) {
    Real acc = 0;
    for (size_t b = 0; b < batch; ++b) acc += dy[b * out + static_cast<size_t>(m)];
    db[m] = acc;
  }
}

template <typename Real>
void relu_forward(const Real* x, Real* y, size_t n) {
#pragma omp parallel for
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i)
    y[i] = x[i] > Real(0) ? x[i] : Real(0);
}

template <typename Real>
void relu_backward(const Real* x, const Real* dy, Real* dx, size_t n) {
#pragma omp parallel for
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i)
    dx[i] = x[i] > Real(0) ? dy[i] : Real(0);
}

template <typename Real>
void dropout_forward(const Real* x, const uint8_t* mask, Real keep_prob, Real* y, size_t n) {
#pragma omp parallel for
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i)
    y[i] = mask[i] ? x[i] / keep_prob : Real(0);
}

template <typename Real>
void dropout_backward(const Real* dy, const uint8_t* mask, Real keep_prob, Real* dx, size_t n) {
#pragma omp parallel for
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(n); ++i)
    dx[i] = mask[i] ? dy[i] / keep_prob : Real(0);
}

#define RCIDS_INSTANTIATE_FAST(Real)                                                           \
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

RCIDS_INSTANTIATE_FAST(float)
RCIDS_INSTANTIATE_FAST(double)

}  // namespace rcids::kernels::fast
