#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "grasp/nn/graph.hpp"
#include "grasp/nn/kernels.hpp"
#include "grasp/nn/tensor.hpp"

namespace grasp::nn {

struct ConvLayer {
  int filters = 0;
  int kernel = 0;
  int stride = 1;
  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

enum class Activation { Relu, Tanh, Identity };

struct NetworkSpec {
  int channels = 1;
  int height = 32;
  int width = 32;
  std::vector<ConvLayer> convs;
  std::vector<int> hidden{256};
  Activation conv_activation = Activation::Relu;
  Activation hidden_activation = Activation::Tanh;
  int action_dim = 4;
  // Value head on its own trunk ("vf/...") instead of sharing the policy trunk.
  bool separate_value = false;
  double init_log_std = -0.6931471805599453;  // ln(0.5)
  double mean_head_gain = 0.01;

  // Spatial shape (C, H, W) after each conv layer; throws ShapeMismatch if any size drops below 1.
  std::vector<std::array<int, 3>> conv_shapes() const;
  int feature_size() const;
  void validate() const;
  // Canonical text of every field; stable across runs.
  std::string describe() const;
  std::uint64_t hash() const;
};

// Layer stacks for the four supported input sizes, followed by one 256-wide tanh layer.
// Throws Unsupported for any other resolution.
NetworkSpec arch_preset(int resolution, int channels = 1);

std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Fan-in uniform weights: U(-sqrt(3 / fan_in), +sqrt(3 / fan_in)), variance 1 / fan_in; zero biases.
template <class T>
void init_dense(ParameterSet<T>& ps, const std::string& name, int in, int out, std::mt19937_64& rng, double gain = 1.0) {
  ps.add(name + "/w", {out, in});
  ps.add(name + "/b", {out});
  auto& w = ps.value(name + "/w");
  const double bound = gain * std::sqrt(3.0 / in);
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : w.data) v = static_cast<T>(u(rng));
}

template <class T>
void init_conv(ParameterSet<T>& ps, const std::string& name, int in_ch, const ConvLayer& l, std::mt19937_64& rng) {
  ps.add(name + "/w", {l.filters, in_ch, l.kernel, l.kernel});
  ps.add(name + "/b", {l.filters});
  auto& w = ps.value(name + "/w");
  const double bound = std::sqrt(3.0 / (in_ch * l.kernel * l.kernel));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : w.data) v = static_cast<T>(u(rng));
}

template <class T>
void init_trunk(const NetworkSpec& spec, ParameterSet<T>& ps, const std::string& prefix, std::mt19937_64& rng) {
  int ch = spec.channels;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    init_conv(ps, prefix + "conv" + std::to_string(i), ch, spec.convs[i], rng);
    ch = spec.convs[i].filters;
  }
  int in = spec.feature_size();
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    init_dense(ps, prefix + "fc" + std::to_string(i), in, spec.hidden[i], rng);
    in = spec.hidden[i];
  }
}

inline int trunk_width(const NetworkSpec& spec) { return spec.hidden.empty() ? spec.feature_size() : spec.hidden.back(); }

// Gaussian actor-critic parameters. Names: "pi/convK", "pi/fcK", "pi/mean", "pi/log_std", and either
// "value" on the shared trunk or "vf/convK", "vf/fcK", "vf/value" when the value trunk is separate.
template <class T>
ParameterSet<T> init_policy_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParameterSet<T> ps;
  init_trunk(spec, ps, "pi/", rng);
  init_dense(ps, "pi/mean", trunk_width(spec), spec.action_dim, rng, spec.mean_head_gain);
  ps.add("pi/log_std", {spec.action_dim}, static_cast<T>(spec.init_log_std));
  if (spec.separate_value) {
    init_trunk(spec, ps, "vf/", rng);
    init_dense(ps, "vf/value", trunk_width(spec), 1, rng);
  } else {
    init_dense(ps, "pi/value", trunk_width(spec), 1, rng);
  }
  return ps;
}

inline bool is_policy_param(const std::string& name) {
  return name.rfind("pi/", 0) == 0 && name.rfind("pi/value", 0) != 0;
}
inline bool is_value_param(const std::string& name) { return !is_policy_param(name); }

template <class T>
Var apply_activation(Graph<T>& g, Var x, Activation a) {
  switch (a) {
    case Activation::Relu: return g.relu(x);
    case Activation::Tanh: return g.tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

// obs is [B, C, H, W]; returns the [B, width] trunk features.
template <class T>
Var trunk_forward(Graph<T>& g, const NetworkSpec& spec, ParameterSet<T>& ps, const std::string& prefix, Var obs) {
  Var x = obs;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    const std::string n = prefix + "conv" + std::to_string(i);
    x = g.conv2d(x, g.param(ps, n + "/w"), g.param(ps, n + "/b"), spec.convs[i].stride);
    x = apply_activation(g, x, spec.conv_activation);
  }
  x = g.flatten(x);
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    const std::string n = prefix + "fc" + std::to_string(i);
    x = g.dense(x, g.param(ps, n + "/w"), g.param(ps, n + "/b"));
    x = apply_activation(g, x, spec.hidden_activation);
  }
  return x;
}

struct PolicyVars {
  Var mean;     // [B, action_dim]
  Var log_std;  // [action_dim]
  Var value;    // [B, 1]
};

template <class T>
PolicyVars policy_forward(Graph<T>& g, const NetworkSpec& spec, ParameterSet<T>& ps, Var obs) {
  const auto& shape = g.value(obs).shape;
  require_shape(shape.size() == 4 && shape[1] == spec.channels && shape[2] == spec.height && shape[3] == spec.width,
                "observation batch " + shape_string(shape) + " does not match the network input");
  PolicyVars out;
  const Var features = trunk_forward(g, spec, ps, "pi/", obs);
  out.mean = g.dense(features, g.param(ps, "pi/mean/w"), g.param(ps, "pi/mean/b"));
  out.log_std = g.param(ps, "pi/log_std");
  if (spec.separate_value) {
    const Var vf = trunk_forward(g, spec, ps, "vf/", obs);
    out.value = g.dense(vf, g.param(ps, "vf/value/w"), g.param(ps, "vf/value/b"));
  } else {
    out.value = g.dense(features, g.param(ps, "pi/value/w"), g.param(ps, "pi/value/b"));
  }
  return out;
}

// Forward-mode pass of the policy mean: returns (mean, d mean) for parameter tangent `tangent`
// (entries matched by name; missing entries count as zero).
template <class T>
std::pair<Tensor<T>, Tensor<T>> policy_mean_jvp(const NetworkSpec& spec, const ParameterSet<T>& ps,
                                                const ParameterSet<T>& tangent, const Tensor<T>& obs) {
  auto tan_of = [&](const std::string& name) -> const Tensor<T>* {
    return tangent.contains(name) ? &tangent.value(name) : nullptr;
  };
  auto activate = [](Activation a, Tensor<T>& y, Tensor<T>& dy) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (a == Activation::Relu) {
        if (y[k] <= T(0)) {
          y[k] = T(0);
          dy[k] = T(0);
        }
      } else if (a == Activation::Tanh) {
        y[k] = std::tanh(y[k]);
        dy[k] *= T(1) - y[k] * y[k];
      }
    }
  };

  // Adds b[c] along dim 1 of a [B, C, ...] tensor.
  auto add_channel_bias = [](Tensor<T>& y, const Tensor<T>& b) {
    const std::size_t rows = static_cast<std::size_t>(y.dim(0)), ch = static_cast<std::size_t>(y.dim(1));
    const std::size_t inner = y.size() / (rows * ch);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < ch; ++c)
        for (std::size_t k = 0; k < inner; ++k) y[(r * ch + c) * inner + k] += b[c];
  };

  const Tensor<T>* no_bias = nullptr;
  Tensor<T> x = obs;
  Tensor<T> dx(obs.shape);
  bool dx_zero = true;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    const std::string n = "pi/conv" + std::to_string(i);
    const auto& w = ps.value(n + "/w");
    const auto& b = ps.value(n + "/b");
    Tensor<T> y, dy;
    kernels::conv2d_forward(x, w, &b, spec.convs[i].stride, y);
    dy = Tensor<T>(y.shape);
    if (!dx_zero) kernels::conv2d_forward(dx, w, no_bias, spec.convs[i].stride, dy, true);
    if (const auto* tw = tan_of(n + "/w")) kernels::conv2d_forward(x, *tw, no_bias, spec.convs[i].stride, dy, true);
    if (const auto* tb = tan_of(n + "/b")) add_channel_bias(dy, *tb);
    activate(spec.conv_activation, y, dy);
    x = std::move(y);
    dx = std::move(dy);
    dx_zero = false;
  }
  const int batch = x.dim(0);
  const int flat = static_cast<int>(x.size() / static_cast<std::size_t>(batch));
  x.shape = {batch, flat};
  dx.shape = {batch, flat};

  auto dense_step = [&](const std::string& n, bool act, Activation a) {
    const auto& w = ps.value(n + "/w");
    const auto& b = ps.value(n + "/b");
    Tensor<T> y, dy;
    kernels::dense_forward(x, w, &b, y);
    dy = Tensor<T>(y.shape);
    if (!dx_zero) kernels::dense_forward(dx, w, no_bias, dy, true);
    if (const auto* tw = tan_of(n + "/w")) kernels::dense_forward(x, *tw, no_bias, dy, true);
    if (const auto* tb = tan_of(n + "/b")) add_channel_bias(dy, *tb);
    if (act) activate(a, y, dy);
    x = std::move(y);
    dx = std::move(dy);
    dx_zero = false;
  };
  for (std::size_t i = 0; i < spec.hidden.size(); ++i)
    dense_step("pi/fc" + std::to_string(i), true, spec.hidden_activation);
  dense_step("pi/mean", false, Activation::Identity);
  return {std::move(x), std::move(dx)};
}

// Deterministic actor for DDPG: tanh-squashed output in [-1, 1]. Names "actor/...".
template <class T>
ParameterSet<T> init_actor_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParameterSet<T> ps;
  init_trunk(spec, ps, "actor/", rng);
  init_dense(ps, "actor/out", trunk_width(spec), spec.action_dim, rng, spec.mean_head_gain);
  return ps;
}

// Q(s, a): trunk on s, concatenated with a, one hidden layer, scalar output. Names "critic/...".
template <class T>
ParameterSet<T> init_critic_params(const NetworkSpec& spec, std::uint64_t seed, int joint_width = 64) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParameterSet<T> ps;
  init_trunk(spec, ps, "critic/", rng);
  init_dense(ps, "critic/joint", trunk_width(spec) + spec.action_dim, joint_width, rng);
  init_dense(ps, "critic/out", joint_width, 1, rng);
  return ps;
}

template <class T>
Var actor_forward(Graph<T>& g, const NetworkSpec& spec, ParameterSet<T>& ps, Var obs) {
  const Var f = trunk_forward(g, spec, ps, "actor/", obs);
  return g.tanh(g.dense(f, g.param(ps, "actor/out/w"), g.param(ps, "actor/out/b")));
}

template <class T>
Var critic_forward(Graph<T>& g, const NetworkSpec& spec, ParameterSet<T>& ps, Var obs, Var action) {
  const Var f = trunk_forward(g, spec, ps, "critic/", obs);
  const Var joint = g.tanh(g.dense(g.concat_cols(f, action), g.param(ps, "critic/joint/w"), g.param(ps, "critic/joint/b")));
  return g.dense(joint, g.param(ps, "critic/out/w"), g.param(ps, "critic/out/b"));
}

}  // namespace grasp::nn
