#include "grasp/harness/replay.hpp"

#include "grasp/error.hpp"
#include "json.hpp"

namespace grasp::harness {

using json = nlohmann::json;

std::string replay_to_json(const EpisodeReplay& r) {
  json j;
  j["seed"] = r.seed;
  j["lesson"] = {{"index", r.lesson.index},
                 {"xy_tol", r.lesson.xy_tol},
                 {"z_range", {r.lesson.z_range.lo, r.lesson.z_range.hi}},
                 {"yaw_tol", r.lesson.yaw_tol},
                 {"advance_threshold", r.lesson.advance_threshold}};
  json actions = json::array();
  for (const auto& a : r.actions) actions.push_back(a.values);
  j["actions"] = actions;
  j["rewards"] = r.rewards;
  return j.dump(2);
}

EpisodeReplay replay_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EpisodeReplay r;
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& l = j.at("lesson");
    r.lesson.index = l.at("index").get<int>();
    r.lesson.xy_tol = l.at("xy_tol").get<double>();
    r.lesson.z_range = {l.at("z_range").at(0).get<double>(), l.at("z_range").at(1).get<double>()};
    r.lesson.yaw_tol = l.at("yaw_tol").get<double>();
    r.lesson.advance_threshold = l.at("advance_threshold").get<double>();
    for (const auto& a : j.at("actions")) r.actions.push_back(Action{a.get<std::array<double, kActionDim>>()});
    r.rewards = j.at("rewards").get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed replay document: ") + e.what());
  }
}

std::vector<RewardBreakdown> replay_episode(const EnvConfig& env_config, const EpisodeReplay& r) {
  Env env(env_config);
  env.reset(r.seed, r.lesson);
  std::vector<RewardBreakdown> out;
  for (const auto& a : r.actions) {
    if (env.done()) break;
    out.push_back(env.step(a).reward);
  }
  return out;
}

}  // namespace grasp::harness
