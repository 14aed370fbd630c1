#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "grasp/harness/config.hpp"

namespace grasp::harness {

struct TrainOptions {
  // Continue from <out>/resume/ when it exists (on-policy algorithms only).
  bool resume = false;
  // Stop after this many updates in this invocation, as if interrupted (0 = run to budget).
  long stop_after_updates = 0;
  std::function<void(const std::string&)> log;
};

struct TrainResult {
  std::filesystem::path dir;
  long env_steps = 0;
  long updates = 0;
  long episodes = 0;
  int lesson = 1;
  double trailing_success = 0.0;  // over the last stop_window episodes
  double trailing_return = 0.0;
  bool stopped_early = false;
};

// Output layout under output_dir(cfg):
//   config.json, metrics.csv, checkpoints/ckpt_NNNNNN.bin, best.bin, final.bin, resume/{params,optim}.bin + state.json
TrainResult train(const RunConfig& cfg, const TrainOptions& opts = {});

}  // namespace grasp::harness
