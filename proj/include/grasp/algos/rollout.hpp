#pragma once

#include <random>
#include <vector>

#include "grasp/nn/tensor.hpp"

namespace grasp::algos {

// One episode as seen by an on-policy learner. Observations are flattened (C, H, W) rows.
struct Trajectory {
  std::vector<std::vector<float>> observations;
  std::vector<std::vector<double>> actions;  // raw samples, before clamping to the action box
  std::vector<double> log_probs;             // under the behavior policy
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<bool> dones;
  // V(s_T) used when the last step is not terminal.
  double bootstrap_value = 0.0;

  std::size_t size() const { return rewards.size(); }
  // Throws ShapeMismatch when the per-step fields disagree in length.
  void validate() const;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation. With lambda = 1 this is the discounted return minus V.
Advantages compute_advantages(const Trajectory& traj, double gamma, double lambda);

// Shifts to zero mean and scales to unit variance; leaves a constant vector at zero.
void normalize_advantages(std::vector<double>& adv);

// Flattened training batch built from whole trajectories.
struct Batch {
  std::vector<int> obs_shape;         // (C, H, W)
  nn::Tensor<float> observations;     // [N, C, H, W]
  nn::Tensor<float> actions;          // [N, action_dim]
  std::vector<double> old_log_probs;
  std::vector<double> old_values;
  std::vector<double> advantages;
  std::vector<double> returns;

  int size() const { return static_cast<int>(old_log_probs.size()); }
  int action_dim() const { return actions.rank() == 2 ? actions.dim(1) : 0; }
  nn::Tensor<float> observation_rows(const std::vector<int>& idx) const;
  nn::Tensor<float> action_rows(const std::vector<int>& idx) const;
};

// Throws ShapeMismatch on an empty input or inconsistent observation sizes.
Batch make_batch(const std::vector<Trajectory>& trajs, const std::vector<int>& obs_shape, double gamma, double lambda,
                 bool normalize = true);

std::vector<int> iota_indices(int n);

// Picks rows of a [N, ...] tensor.
nn::Tensor<float> gather_rows(const nn::Tensor<float>& t, const std::vector<int>& idx);

}  // namespace grasp::algos
