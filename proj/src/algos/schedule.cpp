#include "grasp/algos/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "grasp/error.hpp"

namespace grasp::algos {

LrKind parse_lr_kind(const std::string& s) {
  if (s == "constant") return LrKind::Constant;
  if (s == "polynomial") return LrKind::Polynomial;
  if (s == "exponential") return LrKind::Exponential;
  throw Error(ErrorKind::Config, "unknown learning-rate schedule '" + s + "'");
}

std::string to_string(LrKind k) {
  switch (k) {
    case LrKind::Constant: return "constant";
    case LrKind::Polynomial: return "polynomial";
    case LrKind::Exponential: return "exponential";
  }
  return "?";
}

namespace {
double progress(long step, long horizon) {
  if (horizon <= 0) return 1.0;
  return std::clamp(static_cast<double>(step) / static_cast<double>(horizon), 0.0, 1.0);
}
}  // namespace

double learning_rate(const LrSchedule& s, long step, long horizon) {
  if (!(s.initial > 0.0)) throw Error(ErrorKind::Config, "initial learning rate must be positive");
  const double p = progress(step, horizon);
  switch (s.kind) {
    case LrKind::Constant: return s.initial;
    case LrKind::Polynomial: return std::max(s.floor, s.initial * std::pow(1.0 - p, s.power));
    case LrKind::Exponential: return s.initial * std::pow(s.end_factor, p);
  }
  return s.initial;
}

double entropy_beta(double initial, long step, long horizon) {
  return initial * (1.0 - 0.5 * progress(step, horizon));
}

}  // namespace grasp::algos
