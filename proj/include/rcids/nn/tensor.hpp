#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rcids/error.hpp"

namespace rcids {

// Dense row-major tensor. Real is float in production (checkpoints store
// 32-bit values); the double instantiation exists for finite-difference
// gradient checks, where float rounding would drown the comparison.
template <typename Real>
struct TensorT {
  std::vector<size_t> shape;
  std::vector<Real> data;  // row-major, size == product(shape)

  TensorT() = default;
  explicit TensorT(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(count(shape), Real(0));
  }
  TensorT(std::vector<size_t> s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape))
      fail(ErrorCode::ShapeMismatch, "tensor data length does not match shape");
  }

  static size_t count(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  size_t numel() const { return data.size(); }
  Real* ptr() { return data.data(); }
  const Real* ptr() const { return data.data(); }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }
};

using Tensor = TensorT<float>;

inline std::string shape_text(const std::vector<size_t>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace rcids
