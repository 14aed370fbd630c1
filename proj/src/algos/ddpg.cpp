#include "grasp/algos/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace grasp::algos {

void DdpgConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorKind::Config, "ddpg tau must lie in (0, 1]");
  if (batch < 1 || capacity < static_cast<std::size_t>(batch))
    throw Error(ErrorKind::Config, "ddpg capacity must be at least the batch size");
  if (noise_std < 0.0) throw Error(ErrorKind::Config, "ddpg noise_std must be >= 0");
  if (actor_lr <= 0.0 || critic_lr <= 0.0) throw Error(ErrorKind::Config, "ddpg learning rates must be positive");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorKind::Config, "replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw Error(ErrorKind::BufferUnderflow, "replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (items_.size() < n || items_.empty())
    throw Error(ErrorKind::BufferUnderflow, "replay buffer holds " + std::to_string(items_.size()) +
                                                " transitions, " + std::to_string(n) + " requested");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<double> exploration_action(const std::vector<double>& mu, const std::vector<double>& noise) {
  std::vector<double> a(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) a[j] = std::clamp(mu[j] + noise.at(j), -1.0, 1.0);
  return a;
}

std::vector<double> exploration_action(const std::vector<double>& mu, double noise_std, std::mt19937_64& rng) {
  std::vector<double> noise(mu.size(), 0.0);
  if (noise_std > 0.0) {
    std::normal_distribution<double> n(0.0, noise_std);
    for (auto& x : noise) x = n(rng);
  }
  return exploration_action(mu, noise);
}

DdpgNets DdpgNets::create(const nn::NetworkSpec& spec, std::uint64_t seed) {
  DdpgNets n;
  n.spec = spec;
  n.actor = nn::init_actor_params<float>(spec, seed);
  n.critic = nn::init_critic_params<float>(spec, seed ^ 0x5851F42D4C957F2DULL);
  n.actor_target = n.actor;
  n.critic_target = n.critic;
  return n;
}

nn::Tensor<float> actor_action(DdpgNets& nets, const nn::Tensor<float>& obs) {
  nn::Graph<float> g;
  return g.value(nn::actor_forward(g, nets.spec, nets.actor, g.constant(obs)));
}

namespace {

struct Sampled {
  nn::Tensor<float> obs, next_obs, actions;
};

Sampled gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx, const nn::NetworkSpec& spec) {
  const int n = static_cast<int>(idx.size());
  Sampled s;
  s.obs = nn::Tensor<float>({n, spec.channels, spec.height, spec.width});
  s.next_obs = s.obs;
  s.actions = nn::Tensor<float>({n, spec.action_dim});
  const std::size_t row = s.obs.size() / static_cast<std::size_t>(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = buffer.at(idx[i]);
    if (t.obs.size() != row || t.next_obs.size() != row || t.action.size() != static_cast<std::size_t>(spec.action_dim))
      throw Error(ErrorKind::ShapeMismatch, "replay transition does not match the network input");
    std::copy(t.obs.begin(), t.obs.end(), s.obs.ptr() + i * row);
    std::copy(t.next_obs.begin(), t.next_obs.end(), s.next_obs.ptr() + i * row);
    for (int j = 0; j < spec.action_dim; ++j) s.actions[i * spec.action_dim + j] = static_cast<float>(t.action[j]);
  }
  return s;
}

}  // namespace

std::vector<double> critic_targets(DdpgNets& nets, const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
                                   double gamma) {
  const Sampled s = gather(buffer, idx, nets.spec);
  nn::Graph<float> g;
  const nn::Var next = g.constant(s.next_obs);
  const nn::Var a = nn::actor_forward(g, nets.spec, nets.actor_target, next);
  const auto& q = g.value(nn::critic_forward(g, nets.spec, nets.critic_target, next, a));
  std::vector<double> y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& t = buffer.at(idx[i]);
    y[i] = t.done ? t.reward : t.reward + gamma * q[i];
  }
  return y;
}

DdpgStats ddpg_update(DdpgNets& nets, const ReplayBuffer& buffer, const DdpgConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto idx = buffer.sample(static_cast<std::size_t>(cfg.batch), rng);
  const Sampled s = gather(buffer, idx, nets.spec);
  const std::vector<double> y = critic_targets(nets, buffer, idx, cfg.gamma);
  const int n = static_cast<int>(idx.size());
  DdpgStats stats;

  {
    nn::Tensor<float> target({n, 1});
    for (int i = 0; i < n; ++i) target[i] = static_cast<float>(y[i]);
    nn::Graph<float> g;
    const nn::Var q = nn::critic_forward(g, nets.spec, nets.critic, g.constant(s.obs), g.constant(s.actions));
    const nn::Var loss = g.mean(g.square(g.sub(q, g.constant(target))));
    stats.critic_loss = g.value(loss)[0];
    if (!std::isfinite(stats.critic_loss)) throw Error(ErrorKind::NonFinite, "ddpg critic loss is not finite");
    nets.critic.zero_grad();
    g.backward(loss);
    nets.critic_opt.step(nets.critic, cfg.critic_lr);
  }
  {
    nn::Graph<float> g;
    const nn::Var obs = g.constant(s.obs);
    const nn::Var a = nn::actor_forward(g, nets.spec, nets.actor, obs);
    const nn::Var q = g.mean(nn::critic_forward(g, nets.spec, nets.critic, obs, a));
    const nn::Var loss = g.scale(q, -1.0f);
    stats.mean_q = g.value(q)[0];
    stats.actor_loss = g.value(loss)[0];
    nets.actor.zero_grad();
    nets.critic.zero_grad();
    g.backward(loss);
    nets.critic.zero_grad();
    nets.actor_opt.step(nets.actor, cfg.actor_lr);
  }
  nn::soft_update(nets.actor_target, nets.actor, cfg.tau);
  nn::soft_update(nets.critic_target, nets.critic, cfg.tau);
  if (!nn::all_finite(nets.actor) || !nn::all_finite(nets.critic))
    throw Error(ErrorKind::NonFinite, "ddpg update produced non-finite parameters");
  return stats;
}

}  // namespace grasp::algos
