#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#include "rcids/nn/kernels.hpp"
#include "rcids/nn/tensor.hpp"
#include "rcids/rng.hpp"

namespace rcids {

enum class LayerKind : uint8_t { conv2d = 1, dense = 2, relu = 3, dropout = 4 };

// One layer. Weight layouts:
//   conv2d: weights [k_h, k_w, in_c, out_c], bias [out_c], stride used
//   dense:  weights [in, out] (input-major), bias [out]
//   relu, dropout: no parameters; dropout uses keep_prob
template <typename Real>
struct LayerParamsT {
  LayerKind kind{};
  TensorT<Real> weights;
  TensorT<Real> bias;
  uint32_t stride = 1;
  Real keep_prob = Real(1);
};

template <typename Real>
struct NetworkT {
  std::vector<LayerParamsT<Real>> layers;
};

using LayerParams = LayerParamsT<float>;
using Network = NetworkT<float>;

enum class NetMode : uint8_t { train, eval };

// Activations and dropout masks recorded by a forward pass, consumed by the
// backward pass. acts[0] is the input; acts[i+1] is the output of layer i.
template <typename Real>
struct ForwardTraceT {
  std::vector<TensorT<Real>> acts;
  std::vector<std::vector<uint8_t>> masks;  // empty except for train-mode dropout
};

// Per-layer parameter gradients, aligned with NetworkT::layers. Layers
// without parameters get empty tensors.
template <typename Real>
struct GradientsT {
  std::vector<TensorT<Real>> weights;
  std::vector<TensorT<Real>> bias;
};

// Runs the network on a [batch, ...] input. Conv layers expect
// [batch, h, w, c]; dense layers flatten whatever trailing shape they get.
// In train mode, dropout masks are drawn from streams keyed by
// (dropout_seed, layer index) — the same seed always produces the same
// masks, regardless of thread count. In eval mode dropout is the identity.
// When trace is non-null, activations (and masks) are recorded for backward.
template <typename Real>
TensorT<Real> network_forward(const NetworkT<Real>& net, const TensorT<Real>& input,
                              NetMode mode, uint64_t dropout_seed, Exec exec,
                              ForwardTraceT<std::type_identity_t<Real>>* trace);

// Reverse-mode pass: takes d(loss)/d(output) and the recorded trace, fills
// per-layer parameter gradients, returns d(loss)/d(input).
template <typename Real>
TensorT<Real> network_backward(const NetworkT<Real>& net, const ForwardTraceT<Real>& trace,
                               const TensorT<Real>& dout, Exec exec, GradientsT<Real>& grads);

// Binary cross-entropy on one probability. The log arguments are floored at
// 1e-7, which removes both singularities while keeping bce(1,1) == 0 and
// bce(0.5,1) == ln 2 exact.
double bce_loss(double p, int y);
double bce_grad(double p, int y);  // d bce / d p, with the same flooring
double sigmoid(double z);

// Mean BCE over a batch of logits (shape [batch] or [batch,1]) against 0/1
// labels, with the fused d(loss)/d(logit) = (p - y)/batch. Accumulates in
// double regardless of Real. probs/dlogits may be null when not needed.
template <typename Real>
double sigmoid_bce_with_grad(const TensorT<Real>& logits, const std::vector<uint8_t>& labels,
                             TensorT<std::type_identity_t<Real>>* probs,
                             TensorT<std::type_identity_t<Real>>* dlogits);

// forward + fused BCE head + backward in one call: the gradient of the mean
// BCE of sigmoid(network(input)) w.r.t. every weight and bias.
template <typename Real>
double network_loss_and_gradients(const NetworkT<Real>& net, const TensorT<Real>& input,
                                  const std::vector<uint8_t>& labels, NetMode mode,
                                  uint64_t dropout_seed, Exec exec, GradientsT<Real>& grads,
                                  TensorT<std::type_identity_t<Real>>* probs = nullptr);

// w <- w - lr * g on every parameter tensor.
template <typename Real>
void sgd_step(NetworkT<Real>& net, const GradientsT<Real>& grads, Real lr);

// Uniform init in +/- sqrt(6 / (fan_in + fan_out)).
template <typename Real>
void glorot_fill(TensorT<Real>& t, size_t fan_in, size_t fan_out, Rng& rng);

template <typename Real>
LayerParamsT<Real> make_conv_layer(size_t in_c, size_t out_c, size_t stride, Rng& rng);
template <typename Real>
LayerParamsT<Real> make_dense_layer(size_t in, size_t out, Rng& rng);
template <typename Real>
LayerParamsT<Real> make_relu_layer();
template <typename Real>
LayerParamsT<Real> make_dropout_layer(Real keep_prob);

// Fixed topology dimensions of the two models, used by builders and by
// checkpoint validation.
constexpr size_t kImageSide = 100;
constexpr size_t kImageChannels = 3;
constexpr size_t kConv1Filters = 24;
constexpr size_t kConv2Filters = 64;
constexpr size_t kFlattenWidth = 25 * 25 * 64;  // after two stride-2 convs
constexpr size_t kDense1Width = 500;
constexpr size_t kFeatureWidth = 100;
constexpr double kDropoutKeep = 0.5;

// The road-context CNN:
// 100x100x3 -> conv(24, stride 2) -> relu -> conv(64, stride 2) -> relu
//           -> dropout(keep 0.5) -> dense(40000 -> 500) -> relu
//           -> dense(500 -> 100)
template <typename Real>
NetworkT<Real> make_context_cnn(uint64_t seed);

// The two-layer window classifier: dense(in -> hidden) -> relu
// -> dense(hidden -> 1); the sigmoid lives in the caller.
template <typename Real>
NetworkT<Real> make_window_classifier(size_t input_width, size_t hidden, uint64_t seed);

}  // namespace rcids
