#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace grasp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// One step of the goal-tolerance schedule. z_range is measured above the target's top face.
struct Lesson {
  int index = 1;
  double xy_tol = 0.10;
  Interval z_range{0.01, 0.02};
  double yaw_tol = 10.0;  // degrees
  double advance_threshold = -0.2;
};

inline constexpr int kLessonCount = 19;

struct ScheduleParams {
  double start_xy = 0.10;
  double final_xy = 0.01;
  double start_yaw = 10.0;
  double final_yaw = 2.0;
  double start_threshold = -0.2;
  double final_threshold = 1.0;
  Interval z_range{0.01, 0.02};
};

// Linear interpolation over lessons 1..19. Throws BadSchedule unless tolerances shrink and
// thresholds grow.
std::vector<Lesson> build_schedule(const ScheduleParams& params = {});

struct CurriculumState {
  int lesson = 1;
  std::deque<double> window;
  std::size_t window_size = 100;
  long episodes = 0;
};

// Pushes one episode return. Advances at most one lesson when the window is full and its mean
// beats the current lesson's threshold; the window is cleared on advance.
CurriculumState update(CurriculumState state, double episode_return, const std::vector<Lesson>& schedule);

}  // namespace grasp
