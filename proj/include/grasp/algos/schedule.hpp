#pragma once

#include <string>

namespace grasp::algos {

enum class LrKind { Constant, Polynomial, Exponential };

LrKind parse_lr_kind(const std::string& s);
std::string to_string(LrKind k);

struct LrSchedule {
  LrKind kind = LrKind::Polynomial;
  double initial = 3e-4;
  double power = 1.0;
  double floor = 1e-6;       // polynomial lower bound
  double end_factor = 0.01;  // exponential value at the horizon, relative to initial
};

// Non-increasing in step. Steps past the horizon hold the horizon value.
double learning_rate(const LrSchedule& s, long step, long horizon);

// Linear entropy-coefficient decay at half the speed of a linear learning-rate decay.
double entropy_beta(double initial, long step, long horizon);

}  // namespace grasp::algos
