#pragma once

#include <cstdint>
#include <filesystem>

#include "grasp/nn/tensor.hpp"

namespace grasp::nn {

// Little-endian binary layout:
//   "GRSPCKPT" | u32 version | u64 spec hash | u32 entry count
//   per entry: u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 values[prod(dims)]
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t spec_hash = 0;
  ParameterSet<float> params;
};

// Throws IoError on any write failure.
void save_checkpoint(const std::filesystem::path& path, const ParameterSet<float>& params, std::uint64_t spec_hash);
// Throws IoError for unreadable, truncated or foreign files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace grasp::nn
