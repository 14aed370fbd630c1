#include "grasp/reward.hpp"

namespace grasp {

double reward_touch(const ContactReport& report, const RewardConstants& k) {
  return report.touched_target ? k.touch : 0.0;
}

double reward_collision(const ContactReport& report, const RewardConstants& k) {
  return k.collision * report.undesired_collisions;
}

double reward_goal(bool pos_ok, bool rot_ok, const RewardConstants& k) {
  if (!pos_ok) return 0.0;
  return rot_ok ? k.pos + k.rot : k.pos;
}

double reward_fmt(const Vec3& prev_pos, const Vec3& cur_pos, const Vec3& target, const RewardConstants& k) {
  const Vec3 to_target = target - cur_pos;
  if (!(norm(to_target) > 1e-12)) return 0.0;
  return k.k1 * dot(cur_pos - prev_pos, normalize(to_target));
}

double reward_fft(const Vec3& z_ee, const Vec3& z_block, const RewardConstants& k) {
  return -k.k2 * dot(z_block, z_ee);
}

RewardBreakdown total_reward(const StepGeometry& s, const RewardConstants& k) {
  RewardBreakdown r;
  r.r_touch = reward_touch(s.report, k);
  r.r_collision = reward_collision(s.report, k);
  r.r_pos = s.goal.pos_ok ? k.pos : 0.0;
  r.r_rot = reward_goal(s.goal.pos_ok, s.goal.rot_ok, k) - r.r_pos;
  r.r_fmt = reward_fmt(s.prev_pos, s.cur_pos, s.target, k);
  if (k.literal_facing) {
    const Vec3 to_target = s.target - s.cur_pos;
    r.r_fft = norm(to_target) > 1e-12 ? k.k2 * dot(normalize(to_target), s.z_ee) : 0.0;
  } else {
    r.r_fft = reward_fft(s.z_ee, s.z_block, k);
  }
  r.total = r.r_touch + r.r_collision + r.r_pos + r.r_rot + r.r_fmt + r.r_fft;
  return r;
}

}  // namespace grasp
