#include "grasp/harness/episode.hpp"

#include <cmath>

#include "grasp/algos/ppo.hpp"
#include "grasp/nn/optim.hpp"

namespace grasp::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void accumulate(RewardBreakdown& acc, const RewardBreakdown& r) {
  acc.r_touch += r.r_touch;
  acc.r_collision += r.r_collision;
  acc.r_pos += r.r_pos;
  acc.r_rot += r.r_rot;
  acc.r_fmt += r.r_fmt;
  acc.r_fft += r.r_fft;
  acc.total += r.total;
}

void final_errors(const Env& env, EpisodeSummary& s) {
  s.pos_error = norm(env.tool().tooltip - env.goal().ideal_point());
  s.yaw_error = std::abs(yaw_error_deg(env.tool().pose.rotation.yaw_deg(), env.goal()));
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(base ^ (stream * 0xD1B54A32D192ED03ULL)) + index);
}

nn::Tensor<float> observation_batch(const Observation& obs) {
  return nn::Tensor<float>({1, obs.channels, obs.height, obs.width}, obs.values);
}

EpisodeSummary run_episode(Env& env, std::uint64_t seed, const Lesson& lesson, const PolicyFn& policy, Rng& rng) {
  EpisodeSummary s;
  Observation obs = env.reset(seed, lesson).observation;
  while (!env.done()) {
    const StepResult r = env.step(policy(env, obs, rng));
    accumulate(s.sums, r.reward);
    s.episode_return += r.reward.total;
    s.success = s.success || r.info.success;
    s.steps += 1;
    obs = r.observation;
  }
  final_errors(env, s);
  return s;
}

PolicyEpisode run_gaussian_episode(Env& env, const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps,
                                   std::uint64_t seed, const Lesson& lesson) {
  PolicyEpisode out;
  auto& traj = out.trajectory;
  auto& s = out.summary;
  Rng rng(seed ^ 0xA0761D6478BD642FULL);
  Observation obs = env.reset(seed, lesson).observation;
  while (!env.done()) {
    const auto pe = algos::evaluate_policy(spec, ps, observation_batch(obs));
    const auto raw = nn::gaussian_sample(pe.mean.ptr(), pe.log_std, rng);
    const std::vector<double> mean(pe.mean.data.begin(), pe.mean.data.end());
    const std::vector<double> log_std(pe.log_std.data.begin(), pe.log_std.data.end());
    std::array<double, kActionDim> a{};
    for (int j = 0; j < kActionDim; ++j) a[j] = raw[j];
    const StepResult r = env.step(Action::clamped(a));

    traj.observations.push_back(obs.values);
    traj.actions.push_back(raw);
    traj.log_probs.push_back(nn::gaussian_log_density(raw, mean, log_std));
    traj.values.push_back(pe.value[0]);
    traj.rewards.push_back(r.reward.total);
    traj.dones.push_back(r.done);

    accumulate(s.sums, r.reward);
    s.episode_return += r.reward.total;
    s.success = s.success || r.info.success;
    s.steps += 1;
    obs = r.observation;
  }
  final_errors(env, s);
  return out;
}

}  // namespace grasp::harness
