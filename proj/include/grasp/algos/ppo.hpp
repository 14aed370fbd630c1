#pragma once

#include <random>
#include <vector>

#include "grasp/algos/rollout.hpp"
#include "grasp/algos/schedule.hpp"
#include "grasp/nn/network.hpp"
#include "grasp/nn/optim.hpp"

namespace grasp::algos {

struct PpoConfig {
  double clip = 0.2;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  int epochs = 3;
  int minibatch = 32;
  double gamma = 0.99;
  double lambda = 0.95;
  LrSchedule lr;
  double max_grad_norm = 0.5;

  void validate() const;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  int minibatches = 0;
};

// Per-sample clipped objective min(r * A, clip(r, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double ratio, double advantage, double eps);

struct PpoLoss {
  nn::Var loss;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// -mean(clipped surrogate) + value_coef * MSE(V, returns) - beta * entropy on the rows `idx`.
PpoLoss ppo_loss(nn::Graph<float>& g, const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                 const std::vector<int>& idx, const PpoConfig& cfg, double beta);

// `epochs` passes of shuffled minibatch steps. Throws NonFinite when the loss or the parameters diverge.
PpoStats ppo_update(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, nn::Adam<float>& opt, const Batch& batch,
                    const PpoConfig& cfg, double lr, double beta, std::mt19937_64& rng);

// Policy heads evaluated without recording gradients.
struct PolicyEval {
  nn::Tensor<float> mean;     // [B, action_dim]
  nn::Tensor<float> log_std;  // [action_dim]
  nn::Tensor<float> value;    // [B, 1]
};
PolicyEval evaluate_policy(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const nn::Tensor<float>& obs);

}  // namespace grasp::algos
