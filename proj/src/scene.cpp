#include "grasp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasp/error.hpp"

namespace grasp {

namespace {

double draw(Rng& rng, const Interval& iv) {
  const double u = std::generate_canonical<double, 53>(rng);
  return iv.lo + (iv.hi - iv.lo) * u;
}

int draw_int(Rng& rng, int lo, int hi) {
  if (lo == hi) return lo;
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(rng);
}

ShapeKind draw_kind(Rng& rng, const std::array<double, 3>& weights) {
  const double total = weights[0] + weights[1] + weights[2];
  const double u = std::generate_canonical<double, 53>(rng) * total;
  if (u < weights[0] || weights[1] + weights[2] <= 0.0) return ShapeKind::Box;
  if (u < weights[0] + weights[1] || weights[2] <= 0.0) return ShapeKind::LShape;
  return ShapeKind::UShape;
}

void check_interval(const Interval& iv, const char* name) {
  if (!(iv.lo <= iv.hi)) throw Error(ErrorKind::Config, std::string("inverted interval: ") + name);
}

void check_positive(const Interval& iv, const char* name) {
  check_interval(iv, name);
  if (!(iv.lo > 0.0)) throw Error(ErrorKind::Config, std::string("interval must be strictly positive: ") + name);
}

bool parts_overlap(const std::vector<Obb>& a, const std::vector<Obb>& b) {
  for (const auto& pa : a)
    for (const auto& pb : b)
      if (obb_overlap(pa, pb)) return true;
  return false;
}

}  // namespace

void RandomizationRanges::validate() const {
  if (!(block_count_min >= 1 && block_count_min <= block_count_max && block_count_max <= 3))
    throw Error(ErrorKind::Config, "block count must satisfy 1 <= min <= max <= 3");
  check_interval(block_x, "block_x");
  check_interval(block_y, "block_y");
  check_interval(block_yaw, "block_yaw");
  check_positive(block_scale, "block_scale");
  check_positive(dims_x, "dims_x");
  check_positive(dims_y, "dims_y");
  check_positive(dims_z, "dims_z");
  check_positive(wall_ratio, "wall_ratio");
  if (!(wall_ratio.hi < 0.5)) throw Error(ErrorKind::Config, "wall_ratio must stay below 0.5");
  check_interval(camera_jitter, "camera_jitter");
  check_interval(camera_angle_jitter, "camera_angle_jitter");
  check_positive(near_clip, "near_clip");
  check_positive(far_clip, "far_clip");
  if (!(near_clip.hi < far_clip.lo)) throw Error(ErrorKind::Config, "near clip range must lie below far clip range");
  check_interval(light_x, "light_x");
  check_interval(light_y, "light_y");
  check_interval(light_z, "light_z");
  check_interval(light_intensity, "light_intensity");
  if (light_intensity.lo < 0.0) throw Error(ErrorKind::Config, "light intensity must be non-negative");
  for (double w : kind_weights)
    if (w < 0.0) throw Error(ErrorKind::Config, "shape weights must be non-negative");
  if (kind_weights[0] + kind_weights[1] + kind_weights[2] <= 0.0)
    throw Error(ErrorKind::Config, "at least one shape weight must be positive");
  if (target_rule == TargetRule::FixedIndex && (target_index < 0 || target_index >= block_count_min))
    throw Error(ErrorKind::Config, "fixed target index must exist in every episode");
}

std::vector<Obb> Block::world_parts() const {
  std::vector<Obb> out;
  out.reserve(shape.parts.size());
  for (const auto& p : shape.parts) out.push_back(transform(p, pose));
  return out;
}

bool operator==(const Block& a, const Block& b) {
  return a.shape.kind == b.shape.kind && a.shape.dims == b.shape.dims &&
         a.shape.wall_thickness == b.shape.wall_thickness && a.shape.parts == b.shape.parts && a.pose == b.pose &&
         a.scale == b.scale;
}

bool operator==(const EpisodeConfig& a, const EpisodeConfig& b) {
  return a.blocks == b.blocks && a.target_index == b.target_index && a.support == b.support &&
         a.camera.pose == b.camera.pose && a.camera.near == b.camera.near && a.camera.far == b.camera.far &&
         a.light.position == b.light.position && a.light.intensity == b.light.intensity && a.seed == b.seed;
}

EpisodeConfig sample_episode(std::uint64_t seed, const RandomizationRanges& ranges) {
  ranges.validate();
  Rng rng(seed);
  EpisodeConfig cfg;
  cfg.seed = seed;
  cfg.support = ranges.support;
  const double top = cfg.support_top_z();
  const Vec3 support_center = ranges.support.center;

  const int count = draw_int(rng, ranges.block_count_min, ranges.block_count_max);
  constexpr int kAttempts = 100;
  for (int b = 0; b < count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const ShapeKind kind = draw_kind(rng, ranges.kind_weights);
      const double scale = draw(rng, ranges.block_scale);
      const Vec3 dims{draw(rng, ranges.dims_x) * scale, draw(rng, ranges.dims_y) * scale,
                      draw(rng, ranges.dims_z) * scale};
      const double wall = draw(rng, ranges.wall_ratio) * std::min(dims.x, dims.y);
      const double yaw = draw(rng, ranges.block_yaw);
      const double x = draw(rng, ranges.block_x);
      const double y = draw(rng, ranges.block_y);

      Block block;
      block.shape = compose_shape(kind, dims, wall);
      block.scale = scale;
      block.pose = Pose{{support_center.x + x, support_center.y + y, top + dims.z / 2.0}, Rotation::from_yaw_deg(yaw)};
      const auto parts = block.world_parts();
      bool clear = true;
      for (const auto& other : cfg.blocks) {
        if (parts_overlap(parts, other.world_parts())) {
          clear = false;
          break;
        }
      }
      if (clear) {
        cfg.blocks.push_back(std::move(block));
        placed = true;
      }
    }
    if (!placed)
      throw Error(ErrorKind::PlacementFailure,
                  "block " + std::to_string(b) + " could not be placed in " + std::to_string(kAttempts) + " attempts");
  }

  const Vec3 cam_pos = ranges.camera_position + Vec3{draw(rng, ranges.camera_jitter), draw(rng, ranges.camera_jitter),
                                                      draw(rng, ranges.camera_jitter)};
  const Rotation base = Rotation::look_at(ranges.camera_look_at - ranges.camera_position, {0.0, 0.0, 1.0});
  // Orientation jitter in the camera frame: pan about local y, tilt about local x, roll about local z.
  const double pan = draw(rng, ranges.camera_angle_jitter);
  const double tilt = draw(rng, ranges.camera_angle_jitter);
  const double roll = draw(rng, ranges.camera_angle_jitter);
  const Rotation jitter = Rotation::from_axis_angle({0, 1, 0}, deg_to_rad(pan)) *
                          Rotation::from_axis_angle({1, 0, 0}, deg_to_rad(tilt)) *
                          Rotation::from_axis_angle({0, 0, 1}, deg_to_rad(roll));
  cfg.camera.pose = Pose{cam_pos, base * jitter};
  cfg.camera.near = draw(rng, ranges.near_clip);
  cfg.camera.far = draw(rng, ranges.far_clip);

  cfg.light.position = {draw(rng, ranges.light_x), draw(rng, ranges.light_y), draw(rng, ranges.light_z)};
  cfg.light.intensity = draw(rng, ranges.light_intensity);

  if (ranges.target_rule == TargetRule::FixedIndex) {
    cfg.target_index = std::min(ranges.target_index, static_cast<int>(cfg.blocks.size()) - 1);
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
      const double d = norm(cfg.blocks[i].centroid() - cfg.camera.pose.position);
      if (d < best) {
        best = d;
        cfg.target_index = static_cast<int>(i);
      }
    }
  }
  return cfg;
}

ToolState tool_from_pose(const Pose& pose, const ToolDims& dims) {
  ToolState tool;
  tool.pose = pose;
  tool.tooltip = pose.transform_point(dims.tooltip_offset);
  tool.z_ee = pose.rotation.rotate({0.0, 0.0, -1.0});
  const Vec3 up = -tool.z_ee;
  const Obb head{tool.tooltip + up * dims.head_half.z, dims.head_half, pose.rotation};
  const Obb segment{tool.tooltip + up * (2.0 * dims.head_half.z + dims.segment_half.z), dims.segment_half,
                    pose.rotation};
  tool.body = {head, segment};
  return tool;
}

GoalRegion goal_region(const EpisodeConfig& config, const Lesson& lesson) {
  const Block& target = config.target();
  const Vec3 c = target.centroid();
  GoalRegion g;
  // The centroid sits half a block height below the top face; the goal is measured from that face.
  g.center = {c.x, c.y, c.z + target.shape.dims.z / 2.0};
  g.xy_tol = lesson.xy_tol;
  g.z_range = lesson.z_range;
  g.yaw_tol = lesson.yaw_tol;
  g.target_yaw = target.yaw_deg();
  g.yaw_period = target.shape.kind == ShapeKind::Box ? 180.0 : 360.0;
  return g;
}

ContactReport classify_contacts(const ToolState& tool, const EpisodeConfig& config) {
  ContactReport report;
  for (const auto& part : config.target().world_parts()) {
    if (obb_overlap(tool.head(), part)) {
      report.touched_target = true;
      break;
    }
  }
  for (const auto& piece : tool.body) {
    for (std::size_t i = 0; i < config.blocks.size(); ++i) {
      if (static_cast<int>(i) == config.target_index) continue;
      for (const auto& part : config.blocks[i].world_parts()) {
        if (obb_overlap(piece, part)) {
          report.undesired_collisions += 1;
          break;
        }
      }
    }
    if (obb_overlap(piece, config.support)) report.undesired_collisions += 1;
  }
  return report;
}

double yaw_error_deg(double tool_yaw, const GoalRegion& goal) {
  return wrap_angle_deg(tool_yaw - goal.target_yaw, goal.yaw_period);
}

GoalCheck in_goal(const ToolState& tool, const GoalRegion& goal) {
  GoalCheck check;
  const Vec3 d = tool.tooltip - goal.center;
  check.pos_ok = std::abs(d.x) <= goal.xy_tol && std::abs(d.y) <= goal.xy_tol && goal.z_range.contains(d.z);
  check.rot_ok = std::abs(yaw_error_deg(tool.pose.rotation.yaw_deg(), goal)) <= goal.yaw_tol;
  return check;
}

}  // namespace grasp
