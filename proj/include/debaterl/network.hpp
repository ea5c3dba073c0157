#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "debaterl/matrix.hpp"

namespace debaterl {

enum class Activation { Identity, LeakyRelu, PRelu, Softmax };
enum class Mode { Train, Eval };

constexpr float kBatchNormMomentum = 0.9f;
constexpr float kBatchNormEps = 1e-5f;

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::Identity;
  float leaky_slope = 1e-2f;  // used by LeakyRelu only
  bool batch_norm = false;
};

// One dense layer: y = act(bn(x W + b)).
template <typename T>
struct LayerT {
  LayerSpec spec;
  MatrixT<T> weight;        // in_dim x out_dim
  MatrixT<T> bias;          // 1 x out_dim
  MatrixT<T> prelu_slope;   // 1 x out_dim (PRelu only)
  MatrixT<T> bn_scale;      // 1 x out_dim
  MatrixT<T> bn_shift;      // 1 x out_dim
  MatrixT<T> running_mean;  // 1 x out_dim
  MatrixT<T> running_var;   // 1 x out_dim
};

template <typename T>
struct NetworkT {
  std::vector<LayerT<T>> layers;

  std::size_t input_dim() const { return layers.front().spec.in_dim; }
  std::size_t output_dim() const { return layers.back().spec.out_dim; }

  // All learnable parameters in a fixed declaration order.
  std::vector<MatrixT<T>*> parameters() {
    std::vector<MatrixT<T>*> out;
    for (auto& l : layers) {
      out.push_back(&l.weight);
      out.push_back(&l.bias);
      if (l.spec.activation == Activation::PRelu) out.push_back(&l.prelu_slope);
      if (l.spec.batch_norm) {
        out.push_back(&l.bn_scale);
        out.push_back(&l.bn_shift);
      }
    }
    return out;
  }
  std::vector<const MatrixT<T>*> parameters() const {
    std::vector<const MatrixT<T>*> out;
    for (auto* p : const_cast<NetworkT*>(this)->parameters()) out.push_back(p);
    return out;
  }
};

using Layer = LayerT<float>;
using Network = NetworkT<float>;

template <typename T, typename U>
NetworkT<T> network_cast(const NetworkT<U>& net) {
  NetworkT<T> out;
  for (const auto& l : net.layers) {
    LayerT<T> nl;
    nl.spec = l.spec;
    nl.weight = matrix_cast<T>(l.weight);
    nl.bias = matrix_cast<T>(l.bias);
    nl.prelu_slope = matrix_cast<T>(l.prelu_slope);
    nl.bn_scale = matrix_cast<T>(l.bn_scale);
    nl.bn_shift = matrix_cast<T>(l.bn_shift);
    nl.running_mean = matrix_cast<T>(l.running_mean);
    nl.running_var = matrix_cast<T>(l.running_var);
    out.layers.push_back(std::move(nl));
  }
  return out;
}

template <typename T>
struct LayerCacheT {
  MatrixT<T> input;    // batch x in_dim
  MatrixT<T> bn_norm;  // normalized values (bn layers, train mode)
  MatrixT<T> bn_var;   // 1 x out_dim batch variance (biased)
  MatrixT<T> pre_act;  // batch x out_dim (input to activation)
  MatrixT<T> output;   // batch x out_dim
};

template <typename T>
struct ForwardCacheT {
  std::vector<LayerCacheT<T>> layers;
  bool train_mode = false;
};

template <typename T>
struct GradientsT {
  // Same order as NetworkT::parameters().
  std::vector<MatrixT<T>> grads;
  MatrixT<T> input_grad;  // dL/d input batch
};

using ForwardCache = ForwardCacheT<float>;
using Gradients = GradientsT<float>;

template <typename T>
bool all_finite(const MatrixT<T>& m) {
  for (T v : m.data)
    if (!std::isfinite(double(v))) return false;
  return true;
}

template <typename T>
MatrixT<T> forward(NetworkT<T>& net, const MatrixT<T>& batch, Mode mode,
                   ForwardCacheT<T>* cache = nullptr) {
  if (batch.cols != net.input_dim())
    throw std::invalid_argument("forward: input width mismatch");
  if (batch.rows == 0) throw std::invalid_argument("forward: empty batch");
  if (!all_finite(batch)) throw std::invalid_argument("forward: non-finite input");

  if (cache) {
    cache->layers.assign(net.layers.size(), {});
    cache->train_mode = (mode == Mode::Train);
  }

  MatrixT<T> x = batch;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    LayerT<T>& l = net.layers[li];
    LayerCacheT<T>* lc = cache ? &cache->layers[li] : nullptr;
    if (lc) lc->input = x;

    MatrixT<T> y = matmul(x, l.weight);
    for (std::size_t r = 0; r < y.rows; ++r)
      for (std::size_t c = 0; c < y.cols; ++c) y.at(r, c) += l.bias.at(0, c);

    if (l.spec.batch_norm) {
      const std::size_t n = y.rows;
      if (mode == Mode::Train) {
        if (n < 2)
          throw std::invalid_argument("forward: batch norm needs rows >= 2");
        MatrixT<T> mean(1, y.cols), var(1, y.cols);
        for (std::size_t c = 0; c < y.cols; ++c) {
          double mu = 0.0;
          for (std::size_t r = 0; r < n; ++r) mu += double(y.at(r, c));
          mu /= double(n);
          double v = 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            const double d = double(y.at(r, c)) - mu;
            v += d * d;
          }
          v /= double(n);
          mean.at(0, c) = T(mu);
          var.at(0, c) = T(v);
        }
        MatrixT<T> norm(n, y.cols);
        for (std::size_t c = 0; c < y.cols; ++c) {
          const T inv = T(1) / std::sqrt(var.at(0, c) + T(kBatchNormEps));
          for (std::size_t r = 0; r < n; ++r)
            norm.at(r, c) = (y.at(r, c) - mean.at(0, c)) * inv;
        }
        for (std::size_t c = 0; c < y.cols; ++c) {
          l.running_mean.at(0, c) = T(kBatchNormMomentum) * l.running_mean.at(0, c) +
                                    T(1 - kBatchNormMomentum) * mean.at(0, c);
          l.running_var.at(0, c) = T(kBatchNormMomentum) * l.running_var.at(0, c) +
                                   T(1 - kBatchNormMomentum) * var.at(0, c);
        }
        if (lc) {
          lc->bn_norm = norm;
          lc->bn_var = var;
        }
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < y.cols; ++c)
            y.at(r, c) = norm.at(r, c) * l.bn_scale.at(0, c) + l.bn_shift.at(0, c);
      } else {
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < y.cols; ++c) {
            const T inv =
                T(1) / std::sqrt(l.running_var.at(0, c) + T(kBatchNormEps));
            y.at(r, c) = (y.at(r, c) - l.running_mean.at(0, c)) * inv *
                             l.bn_scale.at(0, c) +
                         l.bn_shift.at(0, c);
          }
      }
    }
    if (lc) lc->pre_act = y;

    switch (l.spec.activation) {
      case Activation::Identity:
        break;
      case Activation::LeakyRelu:
        for (auto& v : y.data)
          if (v < T(0)) v *= T(l.spec.leaky_slope);
        break;
      case Activation::PRelu:
        for (std::size_t r = 0; r < y.rows; ++r)
          for (std::size_t c = 0; c < y.cols; ++c)
            if (y.at(r, c) < T(0)) y.at(r, c) *= l.prelu_slope.at(0, c);
        break;
      case Activation::Softmax:
        for (std::size_t r = 0; r < y.rows; ++r) {
          T mx = y.at(r, 0);
          for (std::size_t c = 1; c < y.cols; ++c) mx = std::max(mx, y.at(r, c));
          double sum = 0.0;
          for (std::size_t c = 0; c < y.cols; ++c) {
            y.at(r, c) = std::exp(y.at(r, c) - mx);
            sum += double(y.at(r, c));
          }
          for (std::size_t c = 0; c < y.cols; ++c) y.at(r, c) /= T(sum);
        }
        break;
    }
    if (lc) lc->output = y;
    x = std::move(y);
  }
  if (!all_finite(x)) throw std::runtime_error("forward: non-finite output");
  return x;
}

// Gradient of a scalar loss w.r.t. every parameter, given dL/d output.
template <typename T>
GradientsT<T> backward(const NetworkT<T>& net, const ForwardCacheT<T>& cache,
                       const MatrixT<T>& grad_output) {
  if (!cache.train_mode)
    throw std::invalid_argument(
        "backward: cache must come from a train-mode forward");
  if (cache.layers.size() != net.layers.size())
    throw std::invalid_argument("backward: cache/net mismatch");

  GradientsT<T> out;
  MatrixT<T> g = grad_output;
  std::vector<std::vector<MatrixT<T>>> per_layer(net.layers.size());

  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const LayerT<T>& l = net.layers[li];
    const LayerCacheT<T>& lc = cache.layers[li];
    if (g.rows != lc.output.rows || g.cols != lc.output.cols)
      throw std::invalid_argument("backward: gradient shape mismatch");

    // Through the activation.
    MatrixT<T> slope_grad;
    switch (l.spec.activation) {
      case Activation::Identity:
        break;
      case Activation::LeakyRelu:
        for (std::size_t i = 0; i < g.size(); ++i)
          if (lc.pre_act.data[i] < T(0)) g.data[i] *= T(l.spec.leaky_slope);
        break;
      case Activation::PRelu: {
        slope_grad = MatrixT<T>(1, g.cols);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < g.cols; ++c) {
            const T x = lc.pre_act.at(r, c);
            if (x < T(0)) {
              slope_grad.at(0, c) += g.at(r, c) * x;
              g.at(r, c) *= l.prelu_slope.at(0, c);
            }
          }
        break;
      }
      case Activation::Softmax:
        for (std::size_t r = 0; r < g.rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < g.cols; ++c)
            dot += double(g.at(r, c)) * double(lc.output.at(r, c));
          for (std::size_t c = 0; c < g.cols; ++c)
            g.at(r, c) = lc.output.at(r, c) * (g.at(r, c) - T(dot));
        }
        break;
    }

    MatrixT<T> scale_grad, shift_grad;
    if (l.spec.batch_norm) {
      const std::size_t n = g.rows;
      scale_grad = MatrixT<T>(1, g.cols);
      shift_grad = MatrixT<T>(1, g.cols);
      MatrixT<T> gx(n, g.cols);
      for (std::size_t c = 0; c < g.cols; ++c) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double gr = double(g.at(r, c));
          sum_g += gr;
          sum_gx += gr * double(lc.bn_norm.at(r, c));
          scale_grad.at(0, c) += T(gr * double(lc.bn_norm.at(r, c)));
          shift_grad.at(0, c) += T(gr);
        }
        const double inv = 1.0 / std::sqrt(double(lc.bn_var.at(0, c)) +
                                           double(kBatchNormEps));
        const double s = double(l.bn_scale.at(0, c));
        for (std::size_t r = 0; r < n; ++r) {
          const double gn = double(g.at(r, c)) * s;
          gx.at(r, c) =
              T(inv * (gn - (sum_g * s) / double(n) -
                       double(lc.bn_norm.at(r, c)) * (sum_gx * s) / double(n)));
        }
      }
      g = std::move(gx);
    }

    MatrixT<T> weight_grad = matmul_at(lc.input, g);
    MatrixT<T> bias_grad(1, g.cols);
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) bias_grad.at(0, c) += g.at(r, c);

    std::vector<MatrixT<T>> grads;
    grads.push_back(std::move(weight_grad));
    grads.push_back(std::move(bias_grad));
    if (l.spec.activation == Activation::PRelu)
      grads.push_back(std::move(slope_grad));
    if (l.spec.batch_norm) {
      grads.push_back(std::move(scale_grad));
      grads.push_back(std::move(shift_grad));
    }
    per_layer[li] = std::move(grads);

    g = matmul_bt(g, l.weight);
  }

  out.input_grad = std::move(g);
  for (auto& v : per_layer)
    for (auto& m : v) out.grads.push_back(std::move(m));
  return out;
}

struct InitConfig {
  bool orthogonal = false;
  float gain = 1.0f;
  float final_gain = 1.0f;  // applied to the last layer's weight
};

Network make_network(const std::vector<LayerSpec>& specs, Rng& rng,
                     const InitConfig& init = {});

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float lr = 5e-4f;
  float weight_decay = 0.0f;
};

AdamState make_adam(const Network& net, float lr, float weight_decay = 0.0f);
void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
               AdamState& state);

// Global L2-norm clipping; returns the pre-clip norm.
double clip_grad_norm(std::vector<Matrix>& grads, double max_norm);

// Weight persistence: text manifest header + length-prefixed little-endian
// f32 arrays in declaration order. Round trip is bit-exact.
void save_network(const Network& net, const std::string& path,
                  const std::vector<std::string>& manifest_extra = {});
Network load_network(const std::string& path,
                     std::vector<std::string>* manifest_extra = nullptr);

}  // namespace debaterl
