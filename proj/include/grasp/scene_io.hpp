#pragma once

#include <string>

#include "grasp/scene.hpp"

namespace grasp {

// JSON document with fields: seed, target_index, support, camera {position, rotation_wxyz, near, far},
// light {position, intensity}, blocks [{kind, dims, wall_thickness, scale, position, rotation_wxyz,
// parts [{center, half_extents, rotation_wxyz}]}]. Doubles are written with round-trip precision.
std::string episode_to_json(const EpisodeConfig& config);
// Throws Config on malformed documents.
EpisodeConfig episode_from_json(const std::string& text);

}  // namespace grasp
