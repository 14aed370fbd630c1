#include "grasp/algos/rollout.hpp"

#include <cmath>
#include <numeric>

namespace grasp::algos {

void Trajectory::validate() const {
  const std::size_t n = rewards.size();
  if (observations.size() != n || actions.size() != n || log_probs.size() != n || values.size() != n ||
      dones.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "trajectory fields have different lengths");
}

Advantages compute_advantages(const Trajectory& traj, double gamma, double lambda) {
  traj.validate();
  const std::size_t n = traj.size();
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double next_value;
    if (traj.dones[i]) {
      next_value = 0.0;
      gae = 0.0;
    } else {
      next_value = i + 1 < n ? traj.values[i + 1] : traj.bootstrap_value;
    }
    const double delta = traj.rewards[i] + gamma * next_value - traj.values[i];
    gae = delta + gamma * lambda * gae;
    out.advantages[i] = gae;
    out.returns[i] = gae + traj.values[i];
  }
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double sd = std::sqrt(var);
  for (double& a : adv) a = sd > 1e-8 ? (a - mean) / sd : 0.0;
}

std::vector<int> iota_indices(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

nn::Tensor<float> gather_rows(const nn::Tensor<float>& t, const std::vector<int>& idx) {
  const std::size_t row = t.size() / static_cast<std::size_t>(t.dim(0));
  std::vector<int> shape = t.shape;
  shape[0] = static_cast<int>(idx.size());
  nn::Tensor<float> out(shape);
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(t.ptr() + static_cast<std::size_t>(idx[r]) * row, row, out.ptr() + r * row);
  return out;
}

nn::Tensor<float> Batch::observation_rows(const std::vector<int>& idx) const { return gather_rows(observations, idx); }
nn::Tensor<float> Batch::action_rows(const std::vector<int>& idx) const { return gather_rows(actions, idx); }

Batch make_batch(const std::vector<Trajectory>& trajs, const std::vector<int>& obs_shape, double gamma, double lambda,
                 bool normalize) {
  if (obs_shape.size() != 3) throw Error(ErrorKind::ShapeMismatch, "observation shape must be (C, H, W)");
  std::size_t n = 0;
  int adim = -1;
  for (const auto& t : trajs) {
    t.validate();
    n += t.size();
    if (t.size() > 0) {
      if (adim < 0) adim = static_cast<int>(t.actions[0].size());
    }
  }
  if (n == 0) throw Error(ErrorKind::ShapeMismatch, "cannot build a batch from empty trajectories");
  const std::size_t row = nn::Tensor<float>::count(obs_shape);

  Batch b;
  b.obs_shape = obs_shape;
  b.observations = nn::Tensor<float>({static_cast<int>(n), obs_shape[0], obs_shape[1], obs_shape[2]});
  b.actions = nn::Tensor<float>({static_cast<int>(n), adim});
  std::size_t k = 0;
  for (const auto& t : trajs) {
    const auto adv = compute_advantages(t, gamma, lambda);
    for (std::size_t i = 0; i < t.size(); ++i, ++k) {
      if (t.observations[i].size() != row || t.actions[i].size() != static_cast<std::size_t>(adim))
        throw Error(ErrorKind::ShapeMismatch, "trajectory step does not match the batch layout");
      std::copy(t.observations[i].begin(), t.observations[i].end(), b.observations.ptr() + k * row);
      for (int j = 0; j < adim; ++j) b.actions[k * static_cast<std::size_t>(adim) + j] = static_cast<float>(t.actions[i][j]);
      b.old_log_probs.push_back(t.log_probs[i]);
      b.old_values.push_back(t.values[i]);
      b.advantages.push_back(adv.advantages[i]);
      b.returns.push_back(adv.returns[i]);
    }
  }
  if (normalize) normalize_advantages(b.advantages);
  return b;
}

}  // namespace grasp::algos
