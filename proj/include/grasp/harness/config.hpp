#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grasp/algos/ddpg.hpp"
#include "grasp/algos/ppo.hpp"
#include "grasp/algos/trpo.hpp"
#include "grasp/curriculum.hpp"
#include "grasp/env.hpp"
#include "grasp/nn/network.hpp"

namespace grasp::harness {

enum class Algorithm { Ppo, Trpo, Ddpg };

Algorithm parse_algorithm(const std::string& s);
std::string to_string(Algorithm a);
ObservationMode parse_observation(const std::string& s);
std::string to_string(ObservationMode m);

struct NetworkConfig {
  // Use the resolution's layer preset; otherwise `convs` is taken as given.
  bool preset = true;
  std::vector<nn::ConvLayer> convs;
  std::vector<int> hidden{256};
  double init_log_std = -0.6931471805599453;
  double mean_head_gain = 0.01;
};

struct CurriculumConfig {
  bool enabled = true;
  int start_lesson = 1;
  std::size_t window = 100;
  ScheduleParams schedule;
  // Freeze the goal tolerances regardless of the lesson when set.
  std::optional<double> xy_tol;
  std::optional<double> yaw_tol;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::Ppo;
  std::uint64_t seed = 0;
  long total_steps = 20000;
  std::string out_dir;
  int workers = 1;
  bool deterministic = true;
  bool record_wall_clock = true;
  int checkpoint_every = 50;
  // Env steps gathered (as whole episodes) per on-policy update.
  int steps_per_update = 1024;
  // Stop once the success rate over the last `stop_window` episodes reaches this value (0 disables).
  double stop_success_rate = 0.0;
  int stop_window = 500;

  EnvConfig env;
  NetworkConfig net;
  CurriculumConfig curriculum;
  algos::PpoConfig ppo;
  algos::TrpoConfig trpo;
  algos::DdpgConfig ddpg;

  int eval_episodes = 100;
  std::uint64_t eval_seed = 1000003;

  // Throws Config on inconsistent settings.
  void validate() const;
};

// Sets one key from a JSON value. Throws Config for unknown keys or values of the wrong type.
void set_key(RunConfig& cfg, const std::string& key, const std::string& json_value);
// `key=value`; the value is parsed as JSON and falls back to a plain string.
void apply_override(RunConfig& cfg, const std::string& assignment);
// Nested objects are flattened with '.' separators.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json_text(const std::string& text);
// Every key with its current value, as a pretty-printed JSON object.
std::string dump_config(const RunConfig& cfg);
std::vector<std::string> config_keys();

nn::NetworkSpec network_spec(const RunConfig& cfg);
std::vector<Lesson> schedule_of(const RunConfig& cfg);
// Lesson `index` (1-based) of the schedule with the frozen tolerances applied.
Lesson lesson_at(const RunConfig& cfg, int index);

// GRASPLAB_OUTPUT_ROOT when set, else "runs".
std::filesystem::path default_output_root();
std::filesystem::path output_dir(const RunConfig& cfg);

}  // namespace grasp::harness
