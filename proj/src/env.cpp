#include "grasp/env.hpp"

#include <algorithm>
#include <cmath>

#include "grasp/error.hpp"

namespace grasp {

namespace {

double to_range(double a, const Interval& iv) { return iv.lo + (a + 1.0) * 0.5 * (iv.hi - iv.lo); }
double from_range(double v, const Interval& iv) { return 2.0 * (v - iv.lo) / (iv.hi - iv.lo) - 1.0; }

void check_axis(const Interval& iv, const char* name) {
  if (!(iv.lo < iv.hi)) throw Error(ErrorKind::Config, std::string("workspace axis needs low < high: ") + name);
}

}  // namespace

Action Action::clamped(std::array<double, kActionDim> v) {
  Action a;
  for (int i = 0; i < kActionDim; ++i) a.values[i] = std::isfinite(v[i]) ? std::clamp(v[i], -1.0, 1.0) : 0.0;
  return a;
}

void WorkspaceBounds::validate() const {
  check_axis(x, "x");
  check_axis(y, "y");
  check_axis(z, "z");
  check_axis(yaw, "yaw");
}

Pose action_to_pose(const Action& a, const WorkspaceBounds& b) {
  const Action c = Action::clamped(a.values);
  const Vec3 p{to_range(c.values[0], b.x), to_range(c.values[1], b.y), to_range(c.values[2], b.z)};
  return Pose{p, Rotation::from_yaw_deg(to_range(c.values[3], b.yaw))};
}

Action pose_to_action(const Vec3& position, double yaw_deg, const WorkspaceBounds& b) {
  return Action::clamped({from_range(position.x, b.x), from_range(position.y, b.y), from_range(position.z, b.z),
                          from_range(yaw_deg, b.yaw)});
}

void EnvConfig::validate() const {
  if (max_steps < 1) throw Error(ErrorKind::Config, "max_steps must be >= 1");
  bounds.validate();
  ranges.validate();
  if (noise_sigma < 0.0) throw Error(ErrorKind::Config, "noise sigma must be non-negative");
  if (!(min_v < max_v)) throw Error(ErrorKind::Config, "sensor range requires min_v < max_v");
  if (observation != ObservationMode::GoalVector && !is_supported_resolution(resolution))
    throw Error(ErrorKind::Config, "resolution must be one of 32, 80, 128, 256");
}

std::uint64_t noise_seed(std::uint64_t episode_seed) { return episode_seed ^ 0x9E3779B97F4A7C15ULL; }

Env::Env(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

Pose Env::commanded_pose(const Action& a) const {
  Pose p = action_to_pose(a, config_.bounds);
  if (config_.fixed_tool_z) p.position.z = *config_.fixed_tool_z;
  return p;
}

ResetResult Env::reset(std::uint64_t seed, const Lesson& lesson) {
  episode_ = sample_episode(seed, config_.ranges);
  goal_ = goal_region(episode_, lesson);
  tool_ = tool_from_pose(Pose{config_.home, Rotation::from_yaw_deg(config_.home_yaw)}, config_.tool);
  prev_tooltip_ = tool_.tooltip;
  noise_rng_.seed(noise_seed(seed));
  step_index_ = 0;
  done_ = false;
  active_ = true;
  first_frame_ = observe();
  return ResetResult{first_frame_, episode_};
}

StepResult Env::step(const Action& a) {
  if (!active_ || done_) throw Error(ErrorKind::EpisodeFinished, "step called without an active episode");
  tool_ = tool_from_pose(commanded_pose(a), config_.tool);

  StepGeometry geo;
  geo.report = classify_contacts(tool_, episode_);
  geo.goal = in_goal(tool_, goal_);
  geo.prev_pos = prev_tooltip_;
  geo.cur_pos = tool_.tooltip;
  geo.target = goal_.center;
  geo.z_ee = tool_.z_ee;
  geo.z_block = episode_.target().pose.rotation.rotate({0.0, 0.0, 1.0});

  StepResult result;
  result.reward = total_reward(geo, config_.reward);
  step_index_ += 1;
  result.info.success = geo.goal.pos_ok && geo.goal.rot_ok;
  result.info.contacts = geo.report;
  result.info.step_index = step_index_;
  result.info.goal = geo.goal;
  done_ = result.info.success || step_index_ >= config_.max_steps;
  result.done = done_;
  prev_tooltip_ = tool_.tooltip;
  result.observation = config_.frame_grab ? first_frame_ : observe();
  return result;
}

Action Env::goal_action() const {
  return pose_to_action(goal_.ideal_point(), goal_.target_yaw, config_.bounds);
}

Observation Env::observe() {
  if (config_.observation == ObservationMode::GoalVector) {
    const Vec3 d = goal_.ideal_point() - tool_.tooltip;
    const double dyaw = wrap_angle_deg(goal_.target_yaw - tool_.pose.rotation.yaw_deg(), goal_.yaw_period);
    Observation obs{4, 1, 1, {}};
    obs.values = {static_cast<float>(d.x), static_cast<float>(d.y), static_cast<float>(d.z),
                  static_cast<float>(dyaw / 180.0)};
    return obs;
  }

  const CameraIntrinsics cam =
      episode_intrinsics(episode_, config_.resolution, config_.resolution, config_.fov_deg);
  const std::span<const Obb> tool_body(tool_.body);
  DepthImage depth = add_noise(render_depth(episode_, cam, tool_body), config_.noise_sigma, noise_rng_);
  depth = clamp_range(depth, config_.min_v, config_.max_v);
  if (config_.quantize) depth = dequantize(quantize(depth, config_.min_v, config_.max_v), config_.min_v, config_.max_v);

  std::optional<RgbImage> rgb;
  if (config_.observation == ObservationMode::DepthRgb) rgb = render_rgb(episode_, cam, episode_.light, tool_body);
  return to_observation(depth, rgb, config_.min_v, config_.max_v,
                        std::make_pair(config_.resolution, config_.resolution));
}

}  // namespace grasp
