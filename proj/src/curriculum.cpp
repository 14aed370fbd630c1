#include "grasp/curriculum.hpp"

#include <numeric>

#include "grasp/error.hpp"

namespace grasp {

std::vector<Lesson> build_schedule(const ScheduleParams& p) {
  if (!(p.start_xy > p.final_xy && p.final_xy > 0.0))
    throw Error(ErrorKind::BadSchedule, "xy tolerance must shrink to a positive value");
  if (!(p.start_yaw > p.final_yaw && p.final_yaw > 0.0))
    throw Error(ErrorKind::BadSchedule, "yaw tolerance must shrink to a positive value");
  if (!(p.final_threshold > p.start_threshold))
    throw Error(ErrorKind::BadSchedule, "advance thresholds must increase");
  if (!(p.z_range.lo < p.z_range.hi)) throw Error(ErrorKind::BadSchedule, "empty z range");

  std::vector<Lesson> lessons;
  lessons.reserve(kLessonCount);
  for (int i = 0; i < kLessonCount; ++i) {
    const double f = static_cast<double>(i) / (kLessonCount - 1);
    Lesson l;
    l.index = i + 1;
    l.xy_tol = p.start_xy + (p.final_xy - p.start_xy) * f;
    l.yaw_tol = p.start_yaw + (p.final_yaw - p.start_yaw) * f;
    l.advance_threshold = p.start_threshold + (p.final_threshold - p.start_threshold) * f;
    l.z_range = p.z_range;
    lessons.push_back(l);
  }
  // Pin the endpoints exactly rather than trusting the interpolation arithmetic.
  lessons.back().xy_tol = p.final_xy;
  lessons.back().yaw_tol = p.final_yaw;
  lessons.back().advance_threshold = p.final_threshold;
  return lessons;
}

CurriculumState update(CurriculumState state, double episode_return, const std::vector<Lesson>& schedule) {
  state.episodes += 1;
  state.window.push_back(episode_return);
  while (state.window.size() > state.window_size) state.window.pop_front();
  if (state.lesson >= kLessonCount || state.window.size() < state.window_size) return state;

  const double mean =
      std::accumulate(state.window.begin(), state.window.end(), 0.0) / static_cast<double>(state.window.size());
  if (mean > schedule.at(static_cast<std::size_t>(state.lesson - 1)).advance_threshold) {
    state.lesson += 1;
    state.window.clear();
  }
  return state;
}

}  // namespace grasp
