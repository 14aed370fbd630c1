#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "grasp/scene.hpp"

namespace grasp {

struct CameraIntrinsics {
  int width = 32;
  int height = 32;
  double fov_deg = 60.0;  // vertical
  double near = 0.4;
  double far = 2.0;

  // Throws Config for unsupported sizes, non-positive clip planes or FOV outside (0, 180).
  void validate() const;
};

bool is_supported_resolution(int pixels);

// Intrinsics of the episode camera at the given resolution and vertical FOV.
CameraIntrinsics episode_intrinsics(const EpisodeConfig& config, int width, int height, double fov_deg);

// Row-major grid of z-depth values in meters.
struct DepthImage {
  int width = 0;
  int height = 0;
  double near = 0.4;
  double far = 2.0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

// Row-major, interleaved r,g,b in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int row, int col, int channel) const {
    return values[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
};

struct GrayImage8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;
};

// Per-surface albedo. Block i uses blocks[i % blocks.size()].
struct Palette {
  std::vector<std::array<double, 3>> blocks{{0.85, 0.25, 0.2}, {0.25, 0.75, 0.3}, {0.25, 0.35, 0.9}};
  std::array<double, 3> support{0.5, 0.5, 0.5};
  std::array<double, 3> tool{0.9, 0.85, 0.2};
};

// Unit-norm world-space ray through the center of pixel (row, col), plus the z-component of the
// unnormalized camera-frame direction's length ratio used to turn ray length into z-depth.
struct PixelRay {
  Vec3 origin;
  Vec3 dir;
  double depth_per_length;  // z-depth = t * depth_per_length
};
PixelRay pixel_ray(const Pose& camera, const CameraIntrinsics& cam, int row, int col);

// z-depth of the nearest hit among blocks, support and `extra` boxes (the tool body);
// misses read `far`; everything is clamped to [near, far].
DepthImage render_depth(const EpisodeConfig& config, const CameraIntrinsics& cam, std::span<const Obb> extra = {});

// Adds i.i.d. N(0, sigma^2) per pixel in row-major order, then re-clamps to [near, far].
DepthImage add_noise(const DepthImage& img, double sigma, Rng& rng);

// Clamps values into [min_v, max_v] and relabels the image range accordingly.
DepthImage clamp_range(const DepthImage& img, double min_v, double max_v);

// 8-bit encoding of the sensor range: actual = round((v - min_v) * 255 / (max_v - min_v)).
std::uint8_t quantize_value(double v, double min_v, double max_v);
// new_v = min_v + actual * (max_v - min_v) / 255.
double dequantize_value(double actual, double min_v, double max_v);

// Throw RangeError when min_v >= max_v or any value lies outside [min_v, max_v].
GrayImage8 quantize(const DepthImage& img, double min_v, double max_v);
DepthImage dequantize(const GrayImage8& q, double min_v, double max_v);

// Lambertian shading: albedo * intensity * max(0, n . l), clamped to [0, 1]; misses are black.
RgbImage render_rgb(const EpisodeConfig& config, const CameraIntrinsics& cam, const Light& light,
                    std::span<const Obb> extra = {}, const Palette& palette = {});

enum class ObservationMode { Depth, DepthRgb, GoalVector };

// Channel-major (C, H, W) float tensor. Image layout: channel 0 = normalized depth,
// channels 1..3 = r, g, b when RGB is present. GoalVector mode uses (4, 1, 1).
struct Observation {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const Observation&, const Observation&) = default;
};

// Depth normalized as (v - min_v) / (max_v - min_v), clamped to [0, 1]. Throws ShapeMismatch
// when the RGB image size differs from the depth image or from `expected` (when given).
Observation to_observation(const DepthImage& depth, const std::optional<RgbImage>& rgb, double min_v, double max_v,
                           std::optional<std::pair<int, int>> expected = std::nullopt);

}  // namespace grasp
