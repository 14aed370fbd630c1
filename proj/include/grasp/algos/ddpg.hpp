#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "grasp/nn/network.hpp"
#include "grasp/nn/optim.hpp"

namespace grasp::algos {

struct DdpgConfig {
  double noise_std = 0.2;
  std::size_t capacity = 100000;
  int batch = 64;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  // Uniform-random steps collected before the first update.
  long warmup = 1000;
  int updates_per_step = 1;

  void validate() const;
};

struct Transition {
  std::vector<float> obs;
  std::vector<double> action;  // the executed (clamped) action
  double reward = 0.0;
  std::vector<float> next_obs;
  bool done = false;
};

// Fixed-capacity ring; once full, each insert overwrites the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Oldest first.
  const Transition& at(std::size_t i) const;
  // Uniform indices with replacement; throws BufferUnderflow when fewer than n transitions are stored.
  std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

// mu + noise, clamped to [-1, 1] per component.
std::vector<double> exploration_action(const std::vector<double>& mu, const std::vector<double>& noise);
std::vector<double> exploration_action(const std::vector<double>& mu, double noise_std, std::mt19937_64& rng);

struct DdpgNets {
  nn::NetworkSpec spec;
  nn::ParameterSet<float> actor;
  nn::ParameterSet<float> critic;
  nn::ParameterSet<float> actor_target;
  nn::ParameterSet<float> critic_target;
  nn::Adam<float> actor_opt;
  nn::Adam<float> critic_opt;

  // Targets start as copies of the online networks.
  static DdpgNets create(const nn::NetworkSpec& spec, std::uint64_t seed);
};

// Deterministic actor output mu(s) for a [B, C, H, W] batch.
nn::Tensor<float> actor_action(DdpgNets& nets, const nn::Tensor<float>& obs);

// r + gamma * (1 - done) * Q_target(s', mu_target(s')) for each sampled transition.
std::vector<double> critic_targets(DdpgNets& nets, const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
                                   double gamma);

struct DdpgStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // -mean Q(s, mu(s))
  double mean_q = 0.0;
};

// Throws BufferUnderflow when the buffer holds fewer than cfg.batch transitions.
DdpgStats ddpg_update(DdpgNets& nets, const ReplayBuffer& buffer, const DdpgConfig& cfg, std::mt19937_64& rng);

}  // namespace grasp::algos
