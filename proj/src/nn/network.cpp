#include "rcids/nn/network.hpp"

#include <cmath>

#include "rcids/error.hpp"

namespace rcids {

namespace {

template <typename Real>
size_t batch_of(const TensorT<Real>& t) {
  if (t.shape.empty()) fail(ErrorCode::ShapeMismatch, "tensor needs a leading batch dim");
  return t.shape[0];
}

template <typename Real>
size_t per_sample(const TensorT<Real>& t) {
  return t.numel() / batch_of(t);
}

template <typename Real>
ConvShape conv_shape_for(const LayerParamsT<Real>& l, const TensorT<Real>& x) {
  if (x.shape.size() != 4)
    fail(ErrorCode::ShapeMismatch,
         "conv2d input must be [batch,h,w,c], got " + shape_text(x.shape));
  if (l.weights.shape.size() != 4)
    fail(ErrorCode::ShapeMismatch, "conv2d weights must be [kh,kw,cin,cout]");
  if (x.shape[3] != l.weights.shape[2])
    fail(ErrorCode::ShapeMismatch,
         "conv2d input channels " + std::to_string(x.shape[3]) + " vs kernel depth " +
             std::to_string(l.weights.shape[2]));
  return conv_geometry(x.shape[0], x.shape[1], x.shape[2], x.shape[3], l.weights.shape[0],
                       l.weights.shape[1], l.weights.shape[3], l.stride);
}

// One dropout mask stream per (seed, layer); masks are drawn serially so the
// stream is identical no matter how the apply loop is split across threads.
std::vector<uint8_t> draw_mask(uint64_t seed, size_t layer_index, size_t n, double keep) {
  Rng rng(mix_key(seed, layer_index, 0, stream::kDropout));
  std::vector<uint8_t> mask(n);
  for (size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < keep ? 1 : 0;
  return mask;
}

}  // namespace

template <typename Real>
TensorT<Real> network_forward(const NetworkT<Real>& net, const TensorT<Real>& input,
                              NetMode mode, uint64_t dropout_seed, Exec exec,
                              ForwardTraceT<std::type_identity_t<Real>>* trace) {
  const bool par = exec == Exec::parallel;
  if (trace) {
    trace->acts.clear();
    trace->masks.assign(net.layers.size(), {});
    trace->acts.push_back(input);
  }
  TensorT<Real> cur = input;
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const LayerParamsT<Real>& l = net.layers[li];
    TensorT<Real> next;
    switch (l.kind) {
      case LayerKind::conv2d: {
        const ConvShape cs = conv_shape_for(l, cur);
        next = TensorT<Real>({cs.batch, cs.out_h, cs.out_w, cs.out_c});
        if (par)
          kernels::fast::conv2d_forward(cur.ptr(), l.weights.ptr(), l.bias.ptr(), next.ptr(), cs);
        else
          kernels::ref::conv2d_forward(cur.ptr(), l.weights.ptr(), l.bias.ptr(), next.ptr(), cs);
        break;
      }
      case LayerKind::dense: {
        const size_t in = l.weights.shape.size() == 2 ? l.weights.shape[0] : 0;
        const size_t out = l.weights.shape.size() == 2 ? l.weights.shape[1] : 0;
        if (in == 0 || out == 0)
          fail(ErrorCode::ShapeMismatch, "dense weights must be [in,out]");
        if (per_sample(cur) != in)
          fail(ErrorCode::ShapeMismatch, "dense layer expects " + std::to_string(in) +
                                             " inputs, got " + shape_text(cur.shape));
        next = TensorT<Real>({batch_of(cur), out});
        if (par)
          kernels::fast::dense_forward(cur.ptr(), l.weights.ptr(), l.bias.ptr(), next.ptr(),
                                       batch_of(cur), in, out);
        else
          kernels::ref::dense_forward(cur.ptr(), l.weights.ptr(), l.bias.ptr(), next.ptr(),
                                      batch_of(cur), in, out);
        break;
      }
      case LayerKind::relu: {
        next = TensorT<Real>(cur.shape);
        if (par)
          kernels::fast::relu_forward(cur.ptr(), next.ptr(), cur.numel());
        else
          kernels::ref::relu_forward(cur.ptr(), next.ptr(), cur.numel());
        break;
      }
      case LayerKind::dropout: {
        if (mode == NetMode::eval) {
          next = cur;  // inverted dropout: eval is the identity
        } else {
          std::vector<uint8_t> mask =
              draw_mask(dropout_seed, li, cur.numel(), static_cast<double>(l.keep_prob));
          next = TensorT<Real>(cur.shape);
          if (par)
            kernels::fast::dropout_forward(cur.ptr(), mask.data(), l.keep_prob, next.ptr(),
                                           cur.numel());
          else
            kernels::ref::dropout_forward(cur.ptr(), mask.data(), l.keep_prob, next.ptr(),
                                          cur.numel());
          if (trace) trace->masks[li] = std::move(mask);
        }
        break;
      }
    }
    cur = std::move(next);
    if (trace) trace->acts.push_back(cur);
  }
  return cur;
}

template <typename Real>
TensorT<Real> network_backward(const NetworkT<Real>& net, const ForwardTraceT<Real>& trace,
                               const TensorT<Real>& dout, Exec exec, GradientsT<Real>& grads) {
  const bool par = exec == Exec::parallel;
  if (trace.acts.size() != net.layers.size() + 1)
    fail(ErrorCode::ShapeMismatch, "forward trace does not match the network");
  grads.weights.assign(net.layers.size(), {});
  grads.bias.assign(net.layers.size(), {});

  TensorT<Real> dcur = dout;
  for (size_t li = net.layers.size(); li-- > 0;) {
    const LayerParamsT<Real>& l = net.layers[li];
    const TensorT<Real>& x = trace.acts[li];
    TensorT<Real> dprev;
    switch (l.kind) {
      case LayerKind::conv2d: {
        const ConvShape cs = conv_shape_for(l, x);
        dprev = TensorT<Real>(x.shape);
        grads.weights[li] = TensorT<Real>(l.weights.shape);
        grads.bias[li] = TensorT<Real>(l.bias.shape);
        if (par) {
          kernels::fast::conv2d_backward_params(x.ptr(), dcur.ptr(), grads.weights[li].ptr(),
                                                grads.bias[li].ptr(), cs);
          kernels::fast::conv2d_backward_input(dcur.ptr(), l.weights.ptr(), dprev.ptr(), cs);
        } else {
          kernels::ref::conv2d_backward_params(x.ptr(), dcur.ptr(), grads.weights[li].ptr(),
                                               grads.bias[li].ptr(), cs);
          kernels::ref::conv2d_backward_input(dcur.ptr(), l.weights.ptr(), dprev.ptr(), cs);
        }
        break;
      }
      case LayerKind::dense: {
        const size_t in = l.weights.shape[0];
        const size_t out = l.weights.shape[1];
        const size_t batch = batch_of(x);
        dprev = TensorT<Real>(x.shape);
        grads.weights[li] = TensorT<Real>(l.weights.shape);
        grads.bias[li] = TensorT<Real>(l.bias.shape);
        if (par) {
          kernels::fast::dense_backward_params(x.ptr(), dcur.ptr(), grads.weights[li].ptr(),
                                               grads.bias[li].ptr(), batch, in, out);
          kernels::fast::dense_backward_input(dcur.ptr(), l.weights.ptr(), dprev.ptr(), batch,
                                              in, out);
        } else {
          kernels::ref::dense_backward_params(x.ptr(), dcur.ptr(), grads.weights[li].ptr(),
                                              grads.bias[li].ptr(), batch, in, out);
          kernels::ref::dense_backward_input(dcur.ptr(), l.weights.ptr(), dprev.ptr(), batch,
                                             in, out);
        }
        break;
      }
      case LayerKind::relu: {
        dprev = TensorT<Real>(x.shape);
        if (par)
          kernels::fast::relu_backward(x.ptr(), dcur.ptr(), dprev.ptr(), x.numel());
        else
          kernels::ref::relu_backward(x.ptr(), dcur.ptr(), dprev.ptr(), x.numel());
        break;
      }
      case LayerKind::dropout: {
        if (trace.masks[li].empty()) {
          dprev = dcur;  // eval-mode dropout was the identity
        } else {
          dprev = TensorT<Real>(x.shape);
          if (par)
            kernels::fast::dropout_backward(dcur.ptr(), trace.masks[li].data(), l.keep_prob,
                                            dprev.ptr(), x.numel());
          else
            kernels::ref::dropout_backward(dcur.ptr(), trace.masks[li].data(), l.keep_prob,
                                           dprev.ptr(), x.numel());
        }
        break;
      }
    }
    dcur = std::move(dprev);
  }
  return dcur;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {
constexpr double kLogFloor = 1e-7;
}

double bce_loss(double p, int y) {
  const double arg = y ? p : 1.0 - p;
  return -std::log(arg > kLogFloor ? arg : kLogFloor);
}

double bce_grad(double p, int y) {
  if (y)
    return -1.0 / (p > kLogFloor ? p : kLogFloor);
  return 1.0 / (1.0 - p > kLogFloor ? 1.0 - p : kLogFloor);
}

template <typename Real>
double sigmoid_bce_with_grad(const TensorT<Real>& logits, const std::vector<uint8_t>& labels,
                             TensorT<std::type_identity_t<Real>>* probs,
                             TensorT<std::type_identity_t<Real>>* dlogits) {
  const size_t batch = labels.size();
  if (logits.numel() != batch)
    fail(ErrorCode::ShapeMismatch, "logit count " + std::to_string(logits.numel()) +
                                       " vs label count " + std::to_string(batch));
  if (probs) *probs = TensorT<Real>(logits.shape);
  if (dlogits) *dlogits = TensorT<Real>(logits.shape);
  double total = 0;
  for (size_t b = 0; b < batch; ++b) {
    const double p = sigmoid(static_cast<double>(logits.data[b]));
    const int y = labels[b] ? 1 : 0;
    total += bce_loss(p, y);
    if (probs) probs->data[b] = static_cast<Real>(p);
    if (dlogits)
      dlogits->data[b] = static_cast<Real>((p - y) / static_cast<double>(batch));
  }
  return total / static_cast<double>(batch);
}

template <typename Real>
double network_loss_and_gradients(const NetworkT<Real>& net, const TensorT<Real>& input,
                                  const std::vector<uint8_t>& labels, NetMode mode,
                                  uint64_t dropout_seed, Exec exec, GradientsT<Real>& grads,
                                  TensorT<std::type_identity_t<Real>>* probs) {
  ForwardTraceT<Real> trace;
  TensorT<Real> logits = network_forward(net, input, mode, dropout_seed, exec, &trace);
  TensorT<Real> dlogits;
  double loss = sigmoid_bce_with_grad(logits, labels, probs, &dlogits);
  (void)network_backward(net, trace, dlogits, exec, grads);
  return loss;
}

template <typename Real>
void sgd_step(NetworkT<Real>& net, const GradientsT<Real>& grads, Real lr) {
  for (size_t li = 0; li < net.layers.size(); ++li) {
    LayerParamsT<Real>& l = net.layers[li];
    if (l.weights.numel()) {
      if (!l.weights.same_shape(grads.weights[li]))
        fail(ErrorCode::ShapeMismatch, "gradient/parameter shape disagreement");
      for (size_t i = 0; i < l.weights.numel(); ++i)
        l.weights.data[i] -= lr * grads.weights[li].data[i];
      for (size_t i = 0; i < l.bias.numel(); ++i)
        l.bias.data[i] -= lr * grads.bias[li].data[i];
    }
  }
}

template <typename Real>
void glorot_fill(TensorT<Real>& t, size_t fan_in, size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (static_cast<double>(fan_in) + static_cast<double>(fan_out)));
  for (Real& v : t.data) v = static_cast<Real>(rng.uniform(-limit, limit));
}

template <typename Real>
LayerParamsT<Real> make_conv_layer(size_t in_c, size_t out_c, size_t stride, Rng& rng) {
  LayerParamsT<Real> l;
  l.kind = LayerKind::conv2d;
  l.stride = static_cast<uint32_t>(stride);
  l.weights = TensorT<Real>({3, 3, in_c, out_c});
  l.bias = TensorT<Real>({out_c});
  glorot_fill(l.weights, 9 * in_c, 9 * out_c, rng);
  return l;
}

template <typename Real>
LayerParamsT<Real> make_dense_layer(size_t in, size_t out, Rng& rng) {
  LayerParamsT<Real> l;
  l.kind = LayerKind::dense;
  l.weights = TensorT<Real>({in, out});
  l.bias = TensorT<Real>({out});
  glorot_fill(l.weights, in, out, rng);
  return l;
}

template <typename Real>
LayerParamsT<Real> make_relu_layer() {
  LayerParamsT<Real> l;
  l.kind = LayerKind::relu;
  return l;
}

template <typename Real>
LayerParamsT<Real> make_dropout_layer(Real keep_prob) {
  LayerParamsT<Real> l;
  l.kind = LayerKind::dropout;
  l.keep_prob = keep_prob;
  return l;
}

template <typename Real>
NetworkT<Real> make_context_cnn(uint64_t seed) {
  Rng rng(mix_key(seed, 0, 0, stream::kInit));
  NetworkT<Real> net;
  net.layers.push_back(make_conv_layer<Real>(kImageChannels, kConv1Filters, 2, rng));
  net.layers.push_back(make_relu_layer<Real>());
  net.layers.push_back(make_conv_layer<Real>(kConv1Filters, kConv2Filters, 2, rng));
  net.layers.push_back(make_relu_layer<Real>());
  net.layers.push_back(make_dropout_layer<Real>(static_cast<Real>(kDropoutKeep)));
  net.layers.push_back(make_dense_layer<Real>(kFlattenWidth, kDense1Width, rng));
  net.layers.push_back(make_relu_layer<Real>());
  net.layers.push_back(make_dense_layer<Real>(kDense1Width, kFeatureWidth, rng));
  return net;
}

template <typename Real>
NetworkT<Real> make_window_classifier(size_t input_width, size_t hidden, uint64_t seed) {
  Rng rng(mix_key(seed, 1, 0, stream::kInit));
  NetworkT<Real> net;
  net.layers.push_back(make_dense_layer<Real>(input_width, hidden, rng));
  net.layers.push_back(make_relu_layer<Real>());
  net.layers.push_back(make_dense_layer<Real>(hidden, 1, rng));
  return net;
}

#define RCIDS_INSTANTIATE_NET(Real)                                                            \
  template TensorT<Real> network_forward<Real>(const NetworkT<Real>&, const TensorT<Real>&,    \
                                               NetMode, uint64_t, Exec, ForwardTraceT<Real>*); \
  template TensorT<Real> network_backward<Real>(const NetworkT<Real>&,                         \
                                                const ForwardTraceT<Real>&,                    \
                                                const TensorT<Real>&, Exec,                    \
                                                GradientsT<Real>&);                            \
  template double sigmoid_bce_with_grad<Real>(const TensorT<Real>&,                            \
                                              const std::vector<uint8_t>&, TensorT<Real>*,     \
                                              TensorT<Real>*);                                 \
  template double network_loss_and_gradients<Real>(const NetworkT<Real>&,                      \
                                                   const TensorT<Real>&,                       \
                                                   const std::vector<uint8_t>&, NetMode,       \
                                                   uint64_t, Exec, GradientsT<Real>&,          \
                                                   TensorT<Real>*);                            \
  template void sgd_step<Real>(NetworkT<Real>&, const GradientsT<Real>&, Real);                \
  template void glorot_fill<Real>(TensorT<Real>&, size_t, size_t, Rng&);                       \
  template LayerParamsT<Real> make_conv_layer<Real>(size_t, size_t, size_t, Rng&);             \
  template LayerParamsT<Real> make_dense_layer<Real>(size_t, size_t, Rng&);                    \
  template LayerParamsT<Real> make_relu_layer<Real>();                                         \
  template LayerParamsT<Real> make_dropout_layer<Real>(Real);                                  \
  template NetworkT<Real> make_context_cnn<Real>(uint64_t);                                    \
  template NetworkT<Real> make_window_classifier<Real>(size_t, size_t, uint64_t);

RCIDS_INSTANTIATE_NET(float)
RCIDS_INSTANTIATE_NET(double)

}  // namespace rcids
