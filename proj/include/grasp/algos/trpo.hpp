#pragma once

#include <functional>
#include <random>
#include <vector>

#include "grasp/algos/rollout.hpp"
#include "grasp/nn/network.hpp"

namespace grasp::algos {

struct TrpoConfig {
  double max_kl = 0.01;
  int cg_iters = 10;
  double cg_tol = 1e-10;
  double damping = 0.1;
  double backtrack_coef = 0.5;
  int max_backtracks = 10;
  double gamma = 0.99;
  double lambda = 0.95;
  // Value trunk fit by plain minibatch gradient descent.
  double vf_lr = 1e-2;
  int vf_epochs = 5;
  int vf_minibatch = 64;

  void validate() const;
};

struct TrpoStats {
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  double kl = 0.0;
  int backtracks = 0;
  bool accepted = false;
  double step_norm = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Solves A x = b for symmetric positive-definite A given only products A v.
std::vector<double> conjugate_gradient(const std::function<std::vector<double>(const std::vector<double>&)>& avp,
                                       const std::vector<double>& b, int iters, double tol = 1e-10);

// Surrogate mean(exp(logp - old_logp) * A) and mean KL(old || new) of the policy at its current parameters.
struct SurrogateEval {
  double surrogate = 0.0;
  double kl = 0.0;
};
SurrogateEval trpo_surrogate(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                             const nn::Tensor<float>& old_mean, const nn::Tensor<float>& old_log_std);

// (F + damping I) v over the policy parameters (see nn::is_policy_param), F the Fisher information of the
// diagonal Gaussian averaged over the batch.
std::vector<double> fisher_vector_product(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps,
                                          const nn::Tensor<float>& obs, const std::vector<double>& v, double damping);

// Requires spec.separate_value so the policy step leaves the value function alone.
TrpoStats trpo_update(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                      const TrpoConfig& cfg, std::mt19937_64& rng);

}  // namespace grasp::algos
