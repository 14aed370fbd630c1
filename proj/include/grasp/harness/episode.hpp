#pragma once

#include <cstdint>
#include <functional>

#include "grasp/algos/rollout.hpp"
#include "grasp/env.hpp"
#include "grasp/nn/network.hpp"

namespace grasp::harness {

// Independent 64-bit seed for episode `index` of stream `stream` (training, evaluation, ...).
std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream);

inline constexpr std::uint64_t kTrainStream = 1;
inline constexpr std::uint64_t kEvalStream = 2;

using PolicyFn = std::function<Action(const Env&, const Observation&, Rng&)>;

struct EpisodeSummary {
  double episode_return = 0.0;
  bool success = false;
  int steps = 0;
  RewardBreakdown sums;  // per-component totals over the episode
  double pos_error = 0.0;  // |tooltip - goal ideal point| after the last step, meters
  double yaw_error = 0.0;  // |wrapped yaw error| after the last step, degrees
};

EpisodeSummary run_episode(Env& env, std::uint64_t seed, const Lesson& lesson, const PolicyFn& policy, Rng& rng);

struct PolicyEpisode {
  algos::Trajectory trajectory;
  EpisodeSummary summary;
};

// Samples actions from the Gaussian policy; the action noise stream is derived from `seed`.
PolicyEpisode run_gaussian_episode(Env& env, const nn::NetworkSpec& spec, nn::ParameterSet<float>& ps,
                                   std::uint64_t seed, const Lesson& lesson);

nn::Tensor<float> observation_batch(const Observation& obs);

}  // namespace grasp::harness
