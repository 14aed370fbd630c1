#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "grasp/curriculum.hpp"
#include "grasp/render.hpp"
#include "grasp/reward.hpp"
#include "grasp/scene.hpp"

namespace grasp {

inline constexpr int kActionDim = 4;

// Normalized absolute tool pose command (x, y, z, yaw), each in [-1, 1].
struct Action {
  std::array<double, kActionDim> values{};

  static Action clamped(std::array<double, kActionDim> v);
};

struct WorkspaceBounds {
  Interval x{-0.4, 0.4};
  Interval y{0.2, 1.0};
  Interval z{0.1, 0.5};  // world z; the default support top sits at 0.1
  Interval yaw{-180.0, 180.0};

  void validate() const;
};

// Affine per-axis map from [-1, 1] onto the bounds. The result is an absolute pose.
Pose action_to_pose(const Action& a, const WorkspaceBounds& b);
// Inverse of action_to_pose for a yaw-only pose inside the bounds.
Action pose_to_action(const Vec3& position, double yaw_deg, const WorkspaceBounds& b);

struct EnvConfig {
  ObservationMode observation = ObservationMode::Depth;
  bool frame_grab = false;
  int max_steps = 10;
  WorkspaceBounds bounds;
  double noise_sigma = 0.005;
  bool quantize = true;
  double min_v = 0.4;  // sensor range mapped onto 8 bits
  double max_v = 2.0;
  int resolution = 32;
  double fov_deg = 60.0;
  RandomizationRanges ranges;
  RewardConstants reward;
  ToolDims tool;
  Vec3 home{0.0, 0.2, 0.5};
  double home_yaw = 0.0;
  // When set, the commanded z is replaced by this world height.
  std::optional<double> fixed_tool_z;

  void validate() const;
};

struct StepInfo {
  bool success = false;
  ContactReport contacts;
  int step_index = 0;
  GoalCheck goal;
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  StepInfo info;
};

struct ResetResult {
  Observation observation;
  EpisodeConfig config;
};

class Env {
 public:
  explicit Env(EnvConfig config);

  // Samples a fresh scene from `seed`, homes the tool and renders the first observation.
  ResetResult reset(std::uint64_t seed, const Lesson& lesson);
  // Throws EpisodeFinished after `done` until the next reset.
  StepResult step(const Action& a);

  const EnvConfig& config() const { return config_; }
  const EpisodeConfig& episode() const { return episode_; }
  const GoalRegion& goal() const { return goal_; }
  const ToolState& tool() const { return tool_; }
  int step_index() const { return step_index_; }
  bool done() const { return done_; }
  bool active() const { return active_; }

  // Action whose mapped pose lands on the goal's ideal point with the target yaw.
  Action goal_action() const;
  // Tool pose commanded by `a` after applying the fixed-z override.
  Pose commanded_pose(const Action& a) const;

 private:
  Observation observe();

  EnvConfig config_;
  EpisodeConfig episode_;
  GoalRegion goal_;
  ToolState tool_;
  Rng noise_rng_;
  Observation first_frame_;
  Vec3 prev_tooltip_;
  int step_index_ = 0;
  bool done_ = false;
  bool active_ = false;
};

// Seed of the per-episode sensor-noise stream.
std::uint64_t noise_seed(std::uint64_t episode_seed);

}  // namespace grasp
