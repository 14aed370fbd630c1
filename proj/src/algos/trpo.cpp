#include "grasp/algos/trpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grasp/nn/optim.hpp"

namespace grasp::algos {

void TrpoConfig::validate() const {
  if (!(max_kl > 0.0)) throw Error(ErrorKind::Config, "trpo max_kl must be positive");
  if (cg_iters < 1 || max_backtracks < 0) throw Error(ErrorKind::Config, "trpo iteration counts out of range");
  if (!(backtrack_coef > 0.0 && backtrack_coef < 1.0)) throw Error(ErrorKind::Config, "backtrack_coef must lie in (0, 1)");
  if (damping < 0.0 || vf_lr <= 0.0 || vf_epochs < 0 || vf_minibatch < 1)
    throw Error(ErrorKind::Config, "trpo value-fit settings out of range");
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

nn::Var mean_forward(nn::Graph<float>& g, const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, nn::Var obs) {
  const nn::Var f = nn::trunk_forward(g, spec, ps, "pi/", obs);
  return g.dense(f, g.param(ps, "pi/mean/w"), g.param(ps, "pi/mean/b"));
}

}  // namespace

std::vector<double> conjugate_gradient(const std::function<std::vector<double>(const std::vector<double>&)>& avp,
                                       const std::vector<double>& b, int iters, double tol) {
  std::vector<double> x(b.size(), 0.0), r = b, p = b;
  double rr = dot(r, r);
  for (int i = 0; i < iters && rr > tol; ++i) {
    const auto ap = avp(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = r[k] + beta * p[k];
    rr = rr_new;
  }
  return x;
}

SurrogateEval trpo_surrogate(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                             const nn::Tensor<float>& old_mean, const nn::Tensor<float>& old_log_std) {
  nn::Graph<float> g;
  const nn::Var mean = mean_forward(g, spec, ps, g.constant(batch.observations));
  const nn::Var ls = g.param(ps, "pi/log_std");
  const auto& lp = g.value(g.gaussian_log_prob(batch.actions, mean, ls));
  const auto& kl = g.value(g.gaussian_kl(old_mean, old_log_std, mean, ls));
  SurrogateEval out;
  const int n = batch.size();
  for (int i = 0; i < n; ++i) {
    out.surrogate += std::exp(static_cast<double>(lp[i]) - batch.old_log_probs[i]) * batch.advantages[i];
    out.kl += kl[i];
  }
  out.surrogate /= n;
  out.kl /= n;
  return out;
}

std::vector<double> fisher_vector_product(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps,
                                          const nn::Tensor<float>& obs, const std::vector<double>& v, double damping) {
  nn::ParameterSet<float> tangent;
  std::size_t k = 0;
  std::size_t log_std_offset = 0;
  for (const auto& e : ps.entries()) {
    if (!nn::is_policy_param(e.name)) continue;
    if (e.name == "pi/log_std") log_std_offset = k;
    auto& t = tangent.add(e.name, e.value.shape);
    for (auto& x : t.data) x = static_cast<float>(v.at(k++));
  }
  if (k != v.size()) throw Error(ErrorKind::ShapeMismatch, "fisher tangent has the wrong length");

  const auto [mean, jv] = nn::policy_mean_jvp(spec, ps, tangent, obs);
  const auto& ls = ps.value("pi/log_std");
  const int rows = jv.dim(0), d = jv.dim(1);
  nn::Tensor<float> seed(jv.shape);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < d; ++j)
      seed[r * d + j] = static_cast<float>(jv[r * d + j] * std::exp(-2.0 * ls[j]) / rows);

  ps.zero_grad();
  nn::Graph<float> g;
  g.backward(mean_forward(g, spec, ps, g.constant(obs)), seed);
  std::vector<double> out = ps.flat_grads(nn::is_policy_param);
  // The mean does not depend on log_std; its Fisher block is 2 I per sample.
  for (int j = 0; j < d; ++j) out[log_std_offset + j] += 2.0 * v[log_std_offset + j];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += damping * v[i];
  ps.zero_grad();
  return out;
}

TrpoStats trpo_update(const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps, const Batch& batch,
                      const TrpoConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  if (!spec.separate_value) throw Error(ErrorKind::Config, "trpo needs a separate value trunk");
  if (batch.size() < 1) throw Error(ErrorKind::ShapeMismatch, "trpo update needs at least one sample");
  TrpoStats stats;

  // Policy gradient of the surrogate at the old parameters.
  nn::Tensor<float> old_mean, old_log_std;
  {
    nn::Graph<float> g;
    const nn::Var mean = mean_forward(g, spec, ps, g.constant(batch.observations));
    const nn::Var ls = g.param(ps, "pi/log_std");
    const nn::Var lp = g.gaussian_log_prob(batch.actions, mean, ls);
    nn::Tensor<float> old_lp({batch.size()}), adv({batch.size()});
    for (int i = 0; i < batch.size(); ++i) {
      old_lp[i] = static_cast<float>(batch.old_log_probs[i]);
      adv[i] = static_cast<float>(batch.advantages[i]);
    }
    const nn::Var surr = g.mean(g.mul(g.exp(g.sub(lp, g.constant(old_lp))), g.constant(adv)));
    old_mean = g.value(mean);
    old_log_std = g.value(ls);
    stats.entropy = g.value(g.gaussian_entropy(ls))[0];
    ps.zero_grad();
    g.backward(surr);
  }
  const std::vector<double> grad = ps.flat_grads(nn::is_policy_param);
  ps.zero_grad();
  const std::vector<double> theta = ps.flat_values(nn::is_policy_param);
  const SurrogateEval before = trpo_surrogate(spec, ps, batch, old_mean, old_log_std);
  stats.surrogate_before = stats.surrogate_after = before.surrogate;

  if (dot(grad, grad) > 0.0) {
    auto avp = [&](const std::vector<double>& v) {
      return fisher_vector_product(spec, ps, batch.observations, v, cfg.damping);
    };
    const std::vector<double> x = conjugate_gradient(avp, grad, cfg.cg_iters, cfg.cg_tol);
    const double xfx = dot(x, avp(x));
    if (xfx > 0.0 && std::isfinite(xfx)) {
      const double scale = std::sqrt(2.0 * cfg.max_kl / xfx);
      double frac = 1.0;
      for (int k = 0; k <= cfg.max_backtracks; ++k, frac *= cfg.backtrack_coef) {
        std::vector<double> cand = theta;
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += frac * scale * x[i];
        ps.set_flat_values(cand, nn::is_policy_param);
        const SurrogateEval after = trpo_surrogate(spec, ps, batch, old_mean, old_log_std);
        if (std::isfinite(after.surrogate) && after.kl <= cfg.max_kl && after.surrogate > before.surrogate) {
          stats.accepted = true;
          stats.kl = after.kl;
          stats.surrogate_after = after.surrogate;
          stats.step_norm = frac * scale * std::sqrt(dot(x, x));
          break;
        }
        stats.backtracks += 1;
      }
    }
    if (!stats.accepted) ps.set_flat_values(theta, nn::is_policy_param);
  }

  // Value fit.
  std::vector<int> order = iota_indices(batch.size());
  int fits = 0;
  for (int epoch = 0; epoch < cfg.vf_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < batch.size(); start += cfg.vf_minibatch) {
      const int end = std::min(batch.size(), start + cfg.vf_minibatch);
      const std::vector<int> idx(order.begin() + start, order.begin() + end);
      nn::Tensor<float> ret({static_cast<int>(idx.size()), 1});
      for (std::size_t i = 0; i < idx.size(); ++i) ret[i] = static_cast<float>(batch.returns[idx[i]]);
      nn::Graph<float> g;
      const nn::Var f = nn::trunk_forward(g, spec, ps, "vf/", g.constant(batch.observation_rows(idx)));
      const nn::Var v = g.dense(f, g.param(ps, "vf/value/w"), g.param(ps, "vf/value/b"));
      const nn::Var loss = g.mean(g.square(g.sub(v, g.constant(ret))));
      const double lv = g.value(loss)[0];
      if (!std::isfinite(lv)) throw Error(ErrorKind::NonFinite, "trpo value loss is not finite");
      ps.zero_grad();
      g.backward(loss);
      nn::sgd_step(ps, cfg.vf_lr, nn::is_value_param);
      stats.value_loss += lv;
      fits += 1;
    }
  }
  ps.zero_grad();
  if (fits > 0) stats.value_loss /= fits;
  if (!nn::all_finite(ps)) throw Error(ErrorKind::NonFinite, "trpo update produced non-finite parameters");
  return stats;
}

}  // namespace grasp::algos
