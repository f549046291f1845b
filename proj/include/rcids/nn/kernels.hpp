#pragma once

#include <cstddef>
#include <cstdint>

namespace rcids {

// Geometry of one "same"-padded strided convolution. Output spatial dims are
// ceil(in/stride); when the padding total is odd the extra row/column goes to
// the bottom/right edge.
struct ConvShape {
  size_t batch = 1;
  size_t in_h = 0, in_w = 0, in_c = 0;
  size_t k_h = 3, k_w = 3, out_c = 0;
  size_t stride = 1;
  size_t out_h = 0, out_w = 0;      // derived
  size_t pad_top = 0, pad_left = 0; // derived
};

// Fills the derived fields from the input geometry.
ConvShape conv_geometry(size_t batch, size_t in_h, size_t in_w, size_t in_c, size_t k_h,
                        size_t k_w, size_t out_c, size_t stride);

// Two implementations of every kernel share one contract:
//
//   kernels::ref  — direct textbook loops, single-threaded. The readable
//                   definition of the operation; tests compare against it.
//   kernels::fast — cache-aware loop order + OpenMP. Work is partitioned so
//                   every output element is owned by exactly one thread and
//                   every per-element accumulation runs in the same order as
//                   ref, which makes results bit-identical to ref at any
//                   thread count.
//
// Layouts: conv activations are [batch, h, w, c]; conv weights are
// [k_h, k_w, in_c, out_c]; dense weights are stored input-major [in, out]
// so that forward, weight-gradient and (after one transpose) input-gradient
// all stream the big matrix linearly with contiguous innermost updates.
// Real is float or double (explicitly instantiated in the .cpp files).

#define RCIDS_DECLARE_KERNELS(ns)                                                             \
  namespace ns {                                                                              \
  template <typename Real>                                                                    \
  void conv2d_forward(const Real* x, const Real* w, const Real* bias, Real* y,                \
                      const ConvShape& s);                                                    \
  template <typename Real>                                                                    \
  void conv2d_backward_input(const Real* dy, const Real* w, Real* dx, const ConvShape& s);    \
  template <typename Real>                                                                    \
  void conv2d_backward_params(const Real* x, const Real* dy, Real* dw, Real* db,              \
                              const ConvShape& s);                                            \
  template <typename Real>                                                                    \
  void dense_forward(const Real* x, const Real* w, const Real* bias, Real* y, size_t batch,   \
                     size_t in, size_t out);                                                  \
  template <typename Real>                                                                    \
  void dense_backward_input(const Real* dy, const Real* w, Real* dx, size_t batch, size_t in, \
                            size_t out);                                                      \
  template <typename Real>                                                                    \
  void dense_backward_params(const Real* x, const Real* dy, Real* dw, Real* db, size_t batch, \
                             size_t in, size_t out);                                          \
  template <typename Real>                                                                    \
  void relu_forward(const Real* x, Real* y, size_t n);                                        \
  template <typename Real>                                                                    \
  void relu_backward(const Real* x, const Real* dy, Real* dx, size_t n);                      \
  template <typename Real>                                                                    \
  void dropout_forward(const Real* x, const uint8_t* mask, Real keep_prob, Real* y,           \
                       size_t n);                                                             \
  template <typename Real>                                                                    \
  void dropout_backward(const Real* dy, const uint8_t* mask, Real keep_prob, Real* dx,        \
                        size_t n);                                                            \
  }

namespace kernels {
RCIDS_DECLARE_KERNELS(ref)
RCIDS_DECLARE_KERNELS(fast)
}  // namespace kernels

#undef RCIDS_DECLARE_KERNELS

// Which kernel family an operation runs on.
enum class Exec : uint8_t { serial, parallel };

}  // namespace rcids
