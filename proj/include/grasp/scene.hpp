#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "grasp/curriculum.hpp"
#include "grasp/geom.hpp"

namespace grasp {

using Rng = std::mt19937_64;

enum class TargetRule { NearestCamera, FixedIndex };

// Per-episode randomization. Every interval is closed; zero-width intervals pin a value.
// Block x/y are offsets from the support's top-face center.
struct RandomizationRanges {
  Obb support{{0.0, 0.6, 0.05}, {0.4, 0.3, 0.05}, Rotation{}};

  int block_count_min = 1;
  int block_count_max = 3;
  Interval block_x{-0.3, 0.3};
  Interval block_y{-0.2, 0.2};
  Interval block_yaw{-180.0, 180.0};  // degrees
  Interval block_scale{0.8, 1.2};
  Interval dims_x{0.10, 0.20};
  Interval dims_y{0.06, 0.12};
  Interval dims_z{0.04, 0.08};
  Interval wall_ratio{0.3, 0.4};  // wall thickness / min lateral dim
  std::array<double, 3> kind_weights{1.0, 1.0, 1.0};  // box, L, U

  Vec3 camera_position{0.0, -0.2, 0.8};
  Vec3 camera_look_at{0.0, 0.6, 0.1};
  Interval camera_jitter{-0.03, 0.03};  // meters, per axis
  Interval camera_angle_jitter{-3.0, 3.0};  // degrees, applied as yaw/pitch/roll
  Interval near_clip{0.3, 0.5};
  Interval far_clip{1.8, 2.2};

  Interval light_x{-0.5, 0.5};
  Interval light_y{0.2, 1.0};
  Interval light_z{1.5, 2.5};
  Interval light_intensity{0.7, 1.3};

  TargetRule target_rule = TargetRule::NearestCamera;
  int target_index = 0;

  // Throws Config if any interval is inverted or a scale/dim range is not strictly positive.
  void validate() const;
};

struct Block {
  ShapeModel shape;  // dims already scaled
  Pose pose;         // pose of the shape-local frame (bounding-box center)
  double scale = 1.0;

  std::vector<Obb> world_parts() const;
  Vec3 centroid() const { return pose.transform_point(shape_centroid(shape)); }
  double top_z() const { return pose.position.z + shape.dims.z / 2.0; }
  double bottom_z() const { return pose.position.z - shape.dims.z / 2.0; }
  double yaw_deg() const { return pose.rotation.yaw_deg(); }
};

struct CameraState {
  Pose pose;  // optical axis = local +z, image rows grow along local +y
  double near = 0.4;
  double far = 2.0;
};

struct Light {
  Vec3 position{0.0, 0.6, 2.0};
  double intensity = 1.0;
};

struct EpisodeConfig {
  std::vector<Block> blocks;
  int target_index = 0;
  Obb support;
  CameraState camera;
  Light light;
  std::uint64_t seed = 0;

  const Block& target() const { return blocks.at(static_cast<std::size_t>(target_index)); }
  double support_top_z() const { return support.center.z + support.half_extents.z; }
};

bool operator==(const Block& a, const Block& b);
bool operator==(const EpisodeConfig& a, const EpisodeConfig& b);

// Deterministic in (seed, ranges). Throws PlacementFailure when a block cannot be placed
// without overlap in 100 attempts.
EpisodeConfig sample_episode(std::uint64_t seed, const RandomizationRanges& ranges);

struct ToolDims {
  Vec3 head_half{0.015, 0.015, 0.025};     // suction head: 0.03 m square face, 0.05 m tall
  Vec3 segment_half{0.01, 0.01, 0.25};     // approach segment standing in for the arm
  Vec3 tooltip_offset{0.0, 0.0, 0.0};      // suction-face center in the tool frame
};

struct ToolState {
  Pose pose;
  Vec3 tooltip;
  Vec3 z_ee;
  std::vector<Obb> body;  // [0] suction head, [1] approach segment

  const Obb& head() const { return body.at(0); }
};

// `pose` is expected to carry a yaw-only rotation. The suction face points down (-z) at identity.
ToolState tool_from_pose(const Pose& pose, const ToolDims& dims = {});

struct GoalRegion {
  Vec3 center;  // target centroid x/y, z on the target's top face
  double xy_tol = 0.1;
  Interval z_range{0.01, 0.02};
  double yaw_tol = 10.0;
  double target_yaw = 0.0;
  double yaw_period = 360.0;  // 180 for two-fold symmetric boxes

  // Middle of the tolerance box: the pose an ideal grasp commands.
  Vec3 ideal_point() const { return {center.x, center.y, center.z + z_range.mid()}; }
};

GoalRegion goal_region(const EpisodeConfig& config, const Lesson& lesson);

struct ContactReport {
  bool touched_target = false;
  int undesired_collisions = 0;
};

ContactReport classify_contacts(const ToolState& tool, const EpisodeConfig& config);

struct GoalCheck {
  bool pos_ok = false;
  bool rot_ok = false;
};

GoalCheck in_goal(const ToolState& tool, const GoalRegion& goal);

// Signed yaw error (tool minus target) wrapped by the goal's symmetry period.
double yaw_error_deg(double tool_yaw, const GoalRegion& goal);

}  // namespace grasp
