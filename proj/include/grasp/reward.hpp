#pragma once

#include "grasp/geom.hpp"
#include "grasp/scene.hpp"

namespace grasp {

struct RewardConstants {
  double k1 = 0.03;          // approach-direction gain
  double k2 = 0.01;          // facing gain
  double touch = 0.1;
  double collision = -0.1;   // per undesired colliding pair
  double pos = 0.5;
  double rot = 0.5;
  // When set, the facing term dots z_ee with the normalized approach direction instead of the
  // block's top-face normal.
  bool literal_facing = false;
};

struct RewardBreakdown {
  double r_touch = 0.0;
  double r_collision = 0.0;
  double r_pos = 0.0;
  double r_rot = 0.0;
  double r_fmt = 0.0;
  double r_fft = 0.0;
  double total = 0.0;
};

double reward_touch(const ContactReport& report, const RewardConstants& k = {});
double reward_collision(const ContactReport& report, const RewardConstants& k = {});
// Rotation reward is only granted on top of a position reward.
double reward_goal(bool pos_ok, bool rot_ok, const RewardConstants& k = {});
// k1 * (v . n) with v = cur - prev and n the unit direction from cur to target; 0 at the target.
double reward_fmt(const Vec3& prev_pos, const Vec3& cur_pos, const Vec3& target, const RewardConstants& k = {});
// -k2 * (z_block . z_ee): +k2 when the suction face opposes the block's top-face normal.
double reward_fft(const Vec3& z_ee, const Vec3& z_block, const RewardConstants& k = {});

struct StepGeometry {
  ContactReport report;
  GoalCheck goal;
  Vec3 prev_pos;
  Vec3 cur_pos;
  Vec3 target;
  Vec3 z_ee;
  Vec3 z_block{0.0, 0.0, 1.0};
};

RewardBreakdown total_reward(const StepGeometry& s, const RewardConstants& k = {});

}  // namespace grasp
