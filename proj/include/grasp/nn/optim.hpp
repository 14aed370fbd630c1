#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "grasp/nn/tensor.hpp"

namespace grasp::nn {

// Adaptive-moment gradient step (beta1 0.9, beta2 0.999, eps 1e-8). Moments are kept per entry, in the
// parameter set's order.
template <class T>
class Adam {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(ParameterSet<T>& ps, double lr) {
    auto& entries = ps.entries();
    if (m_.empty()) {
      for (const auto& e : entries) {
        m_.emplace_back(e.value.shape);
        v_.emplace_back(e.value.shape);
      }
    }
    require_shape(m_.size() == entries.size(), "optimizer state does not match the parameter set");
    t_ += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto& e = entries[i];
      for (std::size_t k = 0; k < e.value.size(); ++k) {
        const double g = e.grad[k];
        const double m = beta1 * m_[i][k] + (1.0 - beta1) * g;
        const double v = beta2 * v_[i][k] + (1.0 - beta2) * g * g;
        m_[i][k] = static_cast<T>(m);
        v_[i][k] = static_cast<T>(v);
        e.value[k] = static_cast<T>(e.value[k] - lr * (m / c1) / (std::sqrt(v / c2) + eps));
      }
    }
  }

  long steps() const { return t_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  const std::vector<Tensor<T>>& first_moments() const { return m_; }
  const std::vector<Tensor<T>>& second_moments() const { return v_; }
  void restore(std::vector<Tensor<T>> m, std::vector<Tensor<T>> v, long t) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
  }

 private:
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
  long t_ = 0;
};

// Plain gradient descent on the entries selected by `keep`.
template <class T>
void sgd_step(ParameterSet<T>& ps, double lr, const std::function<bool(const std::string&)>& keep = {}) {
  for (auto& e : ps.entries()) {
    if (keep && !keep(e.name)) continue;
    for (std::size_t k = 0; k < e.value.size(); ++k) e.value[k] = static_cast<T>(e.value[k] - lr * e.grad[k]);
  }
}

// Rescales all gradients so their global L2 norm is at most max_norm. Returns the pre-clip norm.
template <class T>
double clip_grad_norm(ParameterSet<T>& ps, double max_norm) {
  double sq = 0.0;
  for (const auto& e : ps.entries())
    for (T g : e.grad.data) sq += static_cast<double>(g) * g;
  const double n = std::sqrt(sq);
  if (max_norm > 0.0 && n > max_norm) {
    const double s = max_norm / n;
    for (auto& e : ps.entries())
      for (auto& g : e.grad.data) g = static_cast<T>(g * s);
  }
  return n;
}

// target <- tau * online + (1 - tau) * target, entry by entry.
template <class T>
void soft_update(ParameterSet<T>& target, const ParameterSet<T>& online, double tau) {
  for (auto& e : target.entries()) {
    const auto& src = online.value(e.name);
    for (std::size_t k = 0; k < e.value.size(); ++k)
      e.value[k] = static_cast<T>(tau * src[k] + (1.0 - tau) * e.value[k]);
  }
}

template <class T>
bool all_finite(const ParameterSet<T>& ps) {
  for (const auto& e : ps.entries())
    for (T v : e.value.data)
      if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

// Draws mean + exp(log_std) * N(0, 1) per component.
template <class T>
std::vector<double> gaussian_sample(const T* mean, const Tensor<T>& log_std, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> a(log_std.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = mean[j] + std::exp(static_cast<double>(log_std[j])) * n01(rng);
  return a;
}

// Closed-form log density of one action vector under the diagonal Gaussian.
double gaussian_log_density(const std::vector<double>& action, const std::vector<double>& mean,
                            const std::vector<double>& log_std);

}  // namespace grasp::nn
