#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grasp {

// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  ZeroLength,
  BadDims,
  PlacementFailure,
  RangeError,
  ShapeMismatch,
  Unsupported,
  EpisodeFinished,
  BufferUnderflow,
  NonFinite,
  SpecMismatch,
  IoError,
  BadSchedule,
  Config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroLength: return "ZeroLength";
    case ErrorKind::BadDims: return "BadDims";
    case ErrorKind::PlacementFailure: return "PlacementFailure";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::EpisodeFinished: return "EpisodeFinished";
    case ErrorKind::BufferUnderflow: return "BufferUnderflow";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SpecMismatch: return "SpecMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::BadSchedule: return "BadSchedule";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace grasp
