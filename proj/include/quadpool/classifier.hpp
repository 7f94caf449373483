// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary occupancy head over pooled patches:
//
//   conv 3x3/2 (3 -> 8) -> ReLU -> conv 3x3/2 (8 -> 16) -> ReLU
//     -> global average pool -> linear (16 -> 1) -> logit
//
// Both convolutions use zero padding 1. Forward and reverse-mode passes are
// written out by hand; everything is double precision.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "quadpool/augment.hpp"
#include "quadpool/error.hpp"
#include "quadpool/pooling.hpp"
#include "quadpool/rng.hpp"

namespace quadpool {

inline constexpr int kInChannels = 3;
inline constexpr int kConv1Channels = 8;
inline constexpr int kConv2Channels = 16;
inline constexpr int kKernel = 3;
inline constexpr int kMinPatchSize = 4;

inline constexpr int conv_output_size(int n) { return (n + 2 - kKernel) / 2 + 1; }

struct TensorSpec {
  std::string_view name;
  std::vector<std::size_t> shape;

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

inline const std::array<TensorSpec, 6>& model_tensor_specs() {
  static const std::array<TensorSpec, 6> specs{{
      {"conv1.weight", {kConv1Channels, kInChannels, kKernel, kKernel}},
      {"conv1.bias", {kConv1Channels}},
      {"conv2.weight", {kConv2Channels, kConv1Channels, kKernel, kKernel}},
      {"conv2.bias", {kConv2Channels}},
      {"fc.weight", {kConv2Channels}},
      {"fc.bias", {1}},
  }};
  return specs;
}

/// Classifier weights. Convolution weights are laid out (out, in, ky, kx).
struct ModelParams {
  std::vector<double> conv1_weight;
  std::vector<double> conv1_bias;
  std::vector<double> conv2_weight;
  std::vector<double> conv2_bias;
  std::vector<double> fc_weight;
  std::vector<double> fc_bias;

  static ModelParams zeros() {
    ModelParams p;
    auto t = p.tensors();
    const auto& specs = model_tensor_specs();
    for (std::size_t i = 0; i < t.size(); ++i) t[i]->assign(specs[i].numel(), 0.0);
    return p;
  }

  /// Uniform in +-sqrt(1 / fan_in) per tensor.
  static ModelParams random_init(Rng& rng) {
    ModelParams p = zeros();
    auto fill = [&rng](std::vector<double>& v, double fan_in) {
      const double bound = std::sqrt(1.0 / fan_in);
      for (auto& x : v) x = rng.uniform(-bound, bound);
    };
    constexpr double fan1 = kInChannels * kKernel * kKernel;
    constexpr double fan2 = kConv1Channels * kKernel * kKernel;
    fill(p.conv1_weight, fan1);
    fill(p.conv1_bias, fan1);
    fill(p.conv2_weight, fan2);
    fill(p.conv2_bias, fan2);
    fill(p.fc_weight, kConv2Channels);
    fill(p.fc_bias, kConv2Channels);
    return p;
  }

  std::array<std::vector<double>*, 6> tensors() {
    return {&conv1_weight, &conv1_bias, &conv2_weight, &conv2_bias, &fc_weight, &fc_bias};
  }
  std::array<const std::vector<double>*, 6> tensors() const {
    return {&conv1_weight, &conv1_bias, &conv2_weight, &conv2_bias, &fc_weight, &fc_bias};
  }

  bool has_canonical_shapes() const {
    const auto t = tensors();
    const auto& specs = model_tensor_specs();
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i]->size() != specs[i].numel()) return false;
    return true;
  }

  bool all_finite() const {
    for (const auto* t : tensors())
      for (double v : *t)
        if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Intermediate activations kept for the backward pass.
struct ForwardTrace {
  int patch_size = 0;
  int size1 = 0;  // conv1 output side
  int size2 = 0;  // conv2 output side
  std::vector<double> pre1;  // (c, y, x) pre-activations
  std::vector<double> pre2;
  std::array<double, kConv2Channels> pooled{};
  double logit = 0.0;
};

namespace detail {

// 3x3 stride-2 pad-1 convolution. `input(c, y, x)` reads the input tensor.
template <typename Input>
void conv3x3_s2(const Input& input, int in_ch, int in_size, const std::vector<double>& weight,
                const std::vector<double>& bias, int out_ch, std::vector<double>& out) {
  const int out_size = conv_output_size(in_size);
  out.assign(static_cast<std::size_t>(out_ch) * out_size * out_size, 0.0);
  for (int o = 0; o < out_ch; ++o) {
    for (int y = 0; y < out_size; ++y) {
      for (int x = 0; x < out_size; ++x) {
        double acc = bias[static_cast<std::size_t>(o)];
        for (int c = 0; c < in_ch; ++c) {
          for (int ky = 0; ky < kKernel; ++ky) {
            const int iy = 2 * y + ky - 1;
            if (iy < 0 || iy >= in_size) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int ix = 2 * x + kx - 1;
              if (ix < 0 || ix >= in_size) continue;
              acc += weight[static_cast<std::size_t>(((o * in_ch + c) * kKernel + ky) * kKernel + kx)] *
                     input(c, iy, ix);
            }
          }
        }
        out[static_cast<std::size_t>((o * out_size + y) * out_size + x)] = acc;
      }
    }
  }
}

inline void check_model_inputs(const ModelParams& params, const PooledPatch& patch) {
  if (patch.size < kMinPatchSize)
    throw InvalidParameterError("classifier needs patches of size >= " + std::to_string(kMinPatchSize));
  if (patch.data.size() != static_cast<std::size_t>(patch.size) * patch.size * 3)
    throw InvalidParameterError("patch data does not match its size");
  if (!params.has_canonical_shapes()) throw InvalidParameterError("model parameters have wrong shapes");
}

}  // namespace detail

inline ForwardTrace forward_trace(const ModelParams& params, const PooledPatch& patch) {
  detail::check_model_inputs(params, patch);
  ForwardTrace t;
  t.patch_size = patch.size;
  t.size1 = conv_output_size(patch.size);
  t.size2 = conv_output_size(t.size1);

  detail::conv3x3_s2([&patch](int c, int y, int x) { return patch.at(y, x, c); }, kInChannels, patch.size,
                     params.conv1_weight, params.conv1_bias, kConv1Channels, t.pre1);
  const int s1 = t.size1;
  detail::conv3x3_s2(
      [&t, s1](int c, int y, int x) {
        return std::max(0.0, t.pre1[static_cast<std::size_t>((c * s1 + y) * s1 + x)]);
      },
      kConv1Channels, s1, params.conv2_weight, params.conv2_bias, kConv2Channels, t.pre2);

  const std::size_t area2 = static_cast<std::size_t>(t.size2) * t.size2;
  t.logit = params.fc_bias[0];
  for (std::size_t k = 0; k < kConv2Channels; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < area2; ++i) sum += std::max(0.0, t.pre2[k * area2 + i]);
    t.pooled[k] = sum / static_cast<double>(area2);
    t.logit += params.fc_weight[k] * t.pooled[k];
  }
  return t;
}

/// Occupancy logit; the occupancy score is sigmoid(logit).
inline double forward(const ModelParams& params, const PooledPatch& patch) {
  return forward_trace(params, patch).logit;
}

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grads;
};

/// Binary cross-entropy with logits, loss = log(1 + exp(-y * logit)) with
/// y = +1 for occupied and -1 for empty.
inline double logistic_loss(double logit, bool occupied) {
  const double m = occupied ? -logit : logit;
  return std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
}

/// Adds the gradient of `scale * loss` to `grads` (which must be zero-shaped
/// or accumulated) and returns the unscaled loss.
inline double accumulate_loss_and_grad(const ModelParams& params, const PooledPatch& patch, bool occupied,
                                       double scale, ModelParams& grads) {
  const ForwardTrace t = forward_trace(params, patch);
  const double y = occupied ? 1.0 : -1.0;
  const double loss = logistic_loss(t.logit, occupied);
  const double dlogit = scale * (-y * sigmoid(-y * t.logit));

  const int s1 = t.size1;
  const int s2 = t.size2;
  const std::size_t area2 = static_cast<std::size_t>(s2) * s2;

  grads.fc_bias[0] += dlogit;
  std::vector<double> dpre2(t.pre2.size(), 0.0);
  for (std::size_t k = 0; k < kConv2Channels; ++k) {
    grads.fc_weight[k] += dlogit * t.pooled[k];
    const double dpool = dlogit * params.fc_weight[k] / static_cast<double>(area2);
    for (std::size_t i = 0; i < area2; ++i) dpre2[k * area2 + i] = t.pre2[k * area2 + i] > 0.0 ? dpool : 0.0;
  }

  // conv2: grads w.r.t. its weights and its input (post-ReLU conv1 output).
  std::vector<double> dh1(t.pre1.size(), 0.0);
  for (int o = 0; o < kConv2Channels; ++o) {
    for (int y2 = 0; y2 < s2; ++y2) {
      for (int x2 = 0; x2 < s2; ++x2) {
        const double g = dpre2[static_cast<std::size_t>((o * s2 + y2) * s2 + x2)];
        if (g == 0.0) continue;
        grads.conv2_bias[static_cast<std::size_t>(o)] += g;
        for (int c = 0; c < kConv1Channels; ++c) {
          for (int ky = 0; ky < kKernel; ++ky) {
            const int iy = 2 * y2 + ky - 1;
            if (iy < 0 || iy >= s1) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int ix = 2 * x2 + kx - 1;
              if (ix < 0 || ix >= s1) continue;
              const auto w = static_cast<std::size_t>(((o * kConv1Channels + c) * kKernel + ky) * kKernel + kx);
              const auto in = static_cast<std::size_t>((c * s1 + iy) * s1 + ix);
              grads.conv2_weight[w] += g * std::max(0.0, t.pre1[in]);
              dh1[in] += g * params.conv2_weight[w];
            }
          }
        }
      }
    }
  }

  const int s0 = t.patch_size;
  for (int o = 0; o < kConv1Channels; ++o) {
    for (int y1 = 0; y1 < s1; ++y1) {
      for (int x1 = 0; x1 < s1; ++x1) {
        const auto idx = static_cast<std::size_t>((o * s1 + y1) * s1 + x1);
        if (!(t.pre1[idx] > 0.0)) continue;
        const double g = dh1[idx];
        if (g == 0.0) continue;
        grads.conv1_bias[static_cast<std::size_t>(o)] += g;
        for (int c = 0; c < kInChannels; ++c) {
          for (int ky = 0; ky < kKernel; ++ky) {
            const int iy = 2 * y1 + ky - 1;
            if (iy < 0 || iy >= s0) continue;
            for (int kx = 0; kx < kKernel; ++kx) {
              const int ix = 2 * x1 + kx - 1;
              if (ix < 0 || ix >= s0) continue;
              grads.conv1_weight[static_cast<std::size_t>(((o * kInChannels + c) * kKernel + ky) * kKernel + kx)] +=
                  g * patch.at(iy, ix, c);
            }
          }
        }
      }
    }
  }
  return loss;
}

inline LossAndGrad loss_and_grad(const ModelParams& params, const PooledPatch& patch, bool occupied) {
  LossAndGrad out{0.0, ModelParams::zeros()};
  out.loss = accumulate_loss_and_grad(params, patch, occupied, 1.0, out.grads);
  return out;
}

// --- AdamW -----------------------------------------------------------------

struct OptimState {
  ModelParams first_moment = ModelParams::zeros();
  ModelParams second_moment = ModelParams::zeros();
  std::int64_t step = 0;

  friend bool operator==(const OptimState&, const OptimState&) = default;
};

struct TrainConfig {
  int epochs_phase1 = 50;
  double lr_phase1 = 1e-4;
  int epochs_phase2 = 50;
  double lr_phase2 = 1e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 1;  // scenes per optimizer step
  std::uint64_t seed = 0;
  bool augment = true;
  AugmentParams augment_params{};

  void validate() const {
    if (epochs_phase1 < 0 || epochs_phase2 < 0) throw InvalidParameterError("epoch counts must be >= 0");
    if (!(lr_phase1 > 0.0) || !(lr_phase2 > 0.0)) throw InvalidParameterError("learning rates must be positive");
    if (!(weight_decay >= 0.0)) throw InvalidParameterError("weight decay must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw InvalidParameterError("betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw InvalidParameterError("eps must be positive");
    if (batch_size != 1) throw InvalidParameterError("only mini-batches of one scene are supported");
    augment_params.validate();
  }
};

/// One AdamW update with decoupled weight decay:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
inline void adamw_step(ModelParams& params, const ModelParams& grads, OptimState& state, double lr,
                       const TrainConfig& cfg) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (g[t]->size() != p[t]->size() || m[t]->size() != p[t]->size() || v[t]->size() != p[t]->size())
      throw InvalidParameterError("adamw_step: tensor shape mismatch in " +
                                  std::string(model_tensor_specs()[t].name));
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < p.size(); ++t) {
    auto& pt = *p[t];
    const auto& gt = *g[t];
    auto& mt = *m[t];
    auto& vt = *v[t];
    for (std::size_t i = 0; i < pt.size(); ++i) {
      mt[i] = cfg.beta1 * mt[i] + (1.0 - cfg.beta1) * gt[i];
      vt[i] = cfg.beta2 * vt[i] + (1.0 - cfg.beta2) * gt[i] * gt[i];
      const double m_hat = mt[i] / bc1;
      const double v_hat = vt[i] / bc2;
      pt[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * pt[i]);
    }
  }
}

}  // namespace quadpool
