#include "grasp/algos/ppo.hpp"

#include <algorithm>
#include <cmath>

namespace grasp::algos {

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw Error(ErrorKind::Config, "ppo clip must lie in (0, 1)");
  if (entropy_coef < 0.0 || value_coef < 0.0) throw Error(ErrorKind::Config, "ppo coefficients must be >= 0");
  if (epochs < 1 || minibatch < 1) throw Error(ErrorKind::Config, "ppo epochs and minibatch must be >= 1");
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

PpoLoss ppo_loss(nn::Graph<float>& g, const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                 const std::vector<int>& idx, const PpoConfig& cfg, double beta) {
  const int n = static_cast<int>(idx.size());
  nn::Tensor<float> old_lp({n}), adv({n}), ret({n, 1});
  for (int i = 0; i < n; ++i) {
    old_lp[i] = static_cast<float>(batch.old_log_probs[idx[i]]);
    adv[i] = static_cast<float>(batch.advantages[idx[i]]);
    ret[i] = static_cast<float>(batch.returns[idx[i]]);
  }
  const auto pv = nn::policy_forward(g, spec, ps, g.constant(batch.observation_rows(idx)));
  const nn::Var logp = g.gaussian_log_prob(batch.action_rows(idx), pv.mean, pv.log_std);
  const nn::Var ratio = g.exp(g.sub(logp, g.constant(old_lp)));
  const nn::Var a = g.constant(adv);
  const float eps = static_cast<float>(cfg.clip);
  const nn::Var surr = g.minimum(g.mul(ratio, a), g.mul(g.clip(ratio, 1.0f - eps, 1.0f + eps), a));
  const nn::Var policy_loss = g.scale(g.mean(surr), -1.0f);
  const nn::Var value_loss = g.mean(g.square(g.sub(pv.value, g.constant(ret))));
  const nn::Var entropy = g.gaussian_entropy(pv.log_std);

  PpoLoss out;
  out.loss = g.add(policy_loss, g.scale(value_loss, static_cast<float>(cfg.value_coef)));
  out.loss = g.add(out.loss, g.scale(entropy, static_cast<float>(-beta)));
  out.policy_loss = g.value(policy_loss)[0];
  out.value_loss = g.value(value_loss)[0];
  out.entropy = g.value(entropy)[0];
  const auto& r = g.value(ratio);
  const auto& lp = g.value(logp);
  int clipped = 0;
  double kl = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(r[i] - 1.0f) > eps) ++clipped;
    kl += old_lp[i] - lp[i];
  }
  out.clip_fraction = n > 0 ? static_cast<double>(clipped) / n : 0.0;
  out.approx_kl = n > 0 ? kl / n : 0.0;
  return out;
}

PpoStats ppo_update(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, nn::Adam<float>& opt, const Batch& batch,
                    const PpoConfig& cfg, double lr, double beta, std::mt19937_64& rng) {
  cfg.validate();
  if (batch.size() < 1) throw Error(ErrorKind::ShapeMismatch, "ppo update needs at least one sample");
  PpoStats stats;
  std::vector<int> order = iota_indices(batch.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < batch.size(); start += cfg.minibatch) {
      const int end = std::min(batch.size(), start + cfg.minibatch);
      const std::vector<int> idx(order.begin() + start, order.begin() + end);
      nn::Graph<float> g;
      const PpoLoss l = ppo_loss(g, spec, ps, batch, idx, cfg, beta);
      const double total = g.value(l.loss)[0];
      if (!std::isfinite(total)) throw Error(ErrorKind::NonFinite, "ppo loss is not finite");
      ps.zero_grad();
      g.backward(l.loss);
      stats.grad_norm += nn::clip_grad_norm(ps, cfg.max_grad_norm);
      opt.step(ps, lr);
      stats.policy_loss += l.policy_loss;
      stats.value_loss += l.value_loss;
      stats.entropy += l.entropy;
      stats.approx_kl += l.approx_kl;
      stats.clip_fraction += l.clip_fraction;
      stats.minibatches += 1;
    }
  }
  if (!nn::all_finite(ps)) throw Error(ErrorKind::NonFinite, "ppo update produced non-finite parameters");
  const double m = stats.minibatches;
  stats.policy_loss /= m;
  stats.value_loss /= m;
  stats.entropy /= m;
  stats.approx_kl /= m;
  stats.clip_fraction /= m;
  stats.grad_norm /= m;
  return stats;
}

PolicyEval evaluate_policy(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const nn::Tensor<float>& obs) {
  nn::Graph<float> g;
  const auto pv = nn::policy_forward(g, spec, ps, g.constant(obs));
  return PolicyEval{g.value(pv.mean), g.value(pv.log_std), g.value(pv.value)};
}

}  // namespace grasp::algos
