#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "grasp/harness/config.hpp"
#include "grasp/harness/episode.hpp"

namespace grasp::harness {

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_pos_error = 0.0;  // meters, tooltip vs goal ideal point after the last step
  double p95_pos_error = 0.0;
  double mean_yaw_error = 0.0;  // degrees
  double p95_yaw_error = 0.0;
  double mean_return = 0.0;
};

std::string to_json(const EvalReport& r);

// Runs N episodes on the evaluation seed stream at lesson curriculum.start_lesson (with frozen
// tolerances applied). Throws Config when N < 1.
EvalReport evaluate(const RunConfig& cfg, const PolicyFn& policy, int episodes, std::uint64_t seed);

// Emits the action that maps onto the goal's ideal point with the target yaw.
PolicyFn oracle_policy();
// Independent uniform draws on [-1, 1] per component.
PolicyFn random_policy();
// Deterministic policy from a checkpoint: the Gaussian mean, or the DDPG actor output. Throws
// SpecMismatch when the checkpoint's network hash differs from the config's.
PolicyFn checkpoint_policy(const RunConfig& cfg, const std::filesystem::path& checkpoint);

// Nearest-rank percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

// Writes <prefix>_depth.pgm (plain P2, 8-bit), <prefix>_rgb.ppm (P3) in depth+rgb mode and
// <prefix>.json describing the frame. Returns the image paths. Throws IoError.
std::vector<std::filesystem::path> render_frame(const RunConfig& cfg, std::uint64_t seed,
                                                const std::filesystem::path& prefix);

// One row per lesson: index, xy_tol, z_lo, z_hi, yaw_tol, threshold.
void dump_schedule(const RunConfig& cfg, std::ostream& os);

}  // namespace grasp::harness
