#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grasp/env.hpp"

namespace grasp::harness {

// Everything needed to re-simulate one episode: the scene seed, the goal lesson and the commanded actions.
struct EpisodeReplay {
  std::uint64_t seed = 0;
  Lesson lesson;
  std::vector<Action> actions;
  std::vector<double> rewards;  // recorded totals, for comparison
};

std::string replay_to_json(const EpisodeReplay& r);
// Throws Config on malformed documents.
EpisodeReplay replay_from_json(const std::string& text);

// Re-runs the actions on a fresh Env; stops early if the episode ends first.
std::vector<RewardBreakdown> replay_episode(const EnvConfig& env_config, const EpisodeReplay& r);

}  // namespace grasp::harness
