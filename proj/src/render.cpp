#include "grasp/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasp/error.hpp"

namespace grasp {

namespace {

enum class Surface { Block, Support, Tool };

struct SceneBox {
  Obb box;
  Surface surface;
  int block_index;
};

std::vector<SceneBox> collect_boxes(const EpisodeConfig& config, std::span<const Obb> extra) {
  std::vector<SceneBox> boxes;
  for (std::size_t i = 0; i < config.blocks.size(); ++i)
    for (const auto& part : config.blocks[i].world_parts())
      boxes.push_back({part, Surface::Block, static_cast<int>(i)});
  boxes.push_back({config.support, Surface::Support, -1});
  for (const auto& b : extra) boxes.push_back({b, Surface::Tool, -1});
  return boxes;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  const SceneBox* box = nullptr;
};

Hit nearest_hit(const std::vector<SceneBox>& boxes, const Vec3& origin, const Vec3& dir) {
  Hit hit;
  for (const auto& sb : boxes) {
    const auto t = ray_obb_intersect(origin, dir, sb.box);
    if (t && *t < hit.t) {
      hit.t = *t;
      hit.box = &sb;
    }
  }
  return hit;
}

// Outward normal of the face containing `p` (world frame).
Vec3 face_normal(const Obb& box, const Vec3& p) {
  const Vec3 local = box.rotation.inverse_rotate(p - box.center);
  int best = 0;
  double best_ratio = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double r = std::abs(local[i]) / box.half_extents[i];
    if (r > best_ratio) {
      best_ratio = r;
      best = i;
    }
  }
  Vec3 n;
  n[best] = local[best] >= 0.0 ? 1.0 : -1.0;
  return box.rotation.rotate(n);
}

void check_range(double min_v, double max_v) {
  if (!(min_v < max_v)) throw Error(ErrorKind::RangeError, "quantization range requires min_v < max_v");
}

}  // namespace

bool is_supported_resolution(int pixels) {
  return pixels == 32 || pixels == 80 || pixels == 128 || pixels == 256;
}

void CameraIntrinsics::validate() const {
  if (!is_supported_resolution(width) || !is_supported_resolution(height))
    throw Error(ErrorKind::Config, "image size must be one of 32, 80, 128, 256");
  if (!(near > 0.0 && near < far)) throw Error(ErrorKind::Config, "clip planes require 0 < near < far");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error(ErrorKind::Config, "vertical FOV must lie in (0, 180)");
}

CameraIntrinsics episode_intrinsics(const EpisodeConfig& config, int width, int height, double fov_deg) {
  return CameraIntrinsics{width, height, fov_deg, config.camera.near, config.camera.far};
}

PixelRay pixel_ray(const Pose& camera, const CameraIntrinsics& cam, int row, int col) {
  const double focal = (cam.height / 2.0) / std::tan(deg_to_rad(cam.fov_deg) / 2.0);
  const Vec3 d_cam{(col + 0.5 - cam.width / 2.0) / focal, (row + 0.5 - cam.height / 2.0) / focal, 1.0};
  const double len = norm(d_cam);
  return PixelRay{camera.position, camera.rotation.rotate(d_cam / len), 1.0 / len};
}

DepthImage render_depth(const EpisodeConfig& config, const CameraIntrinsics& cam, std::span<const Obb> extra) {
  cam.validate();
  const auto boxes = collect_boxes(config, extra);
  DepthImage img{cam.width, cam.height, cam.near, cam.far, {}};
  img.values.resize(static_cast<std::size_t>(cam.width) * cam.height);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const PixelRay ray = pixel_ray(config.camera.pose, cam, r, c);
      const Hit hit = nearest_hit(boxes, ray.origin, ray.dir);
      const double z = hit.box ? hit.t * ray.depth_per_length : cam.far;
      img.values[static_cast<std::size_t>(r) * cam.width + c] = std::clamp(z, cam.near, cam.far);
    }
  }
  return img;
}

DepthImage add_noise(const DepthImage& img, double sigma, Rng& rng) {
  if (sigma < 0.0) throw Error(ErrorKind::RangeError, "noise sigma must be non-negative");
  DepthImage out = img;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& v : out.values) v = std::clamp(v + noise(rng), img.near, img.far);
  return out;
}

DepthImage clamp_range(const DepthImage& img, double min_v, double max_v) {
  check_range(min_v, max_v);
  DepthImage out = img;
  out.near = min_v;
  out.far = max_v;
  for (auto& v : out.values) v = std::clamp(v, min_v, max_v);
  return out;
}

std::uint8_t quantize_value(double v, double min_v, double max_v) {
  check_range(min_v, max_v);
  if (!(v >= min_v && v <= max_v)) throw Error(ErrorKind::RangeError, "depth value outside quantization range");
  const double q = std::round((v - min_v) * 255.0 / (max_v - min_v));
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

double dequantize_value(double actual, double min_v, double max_v) {
  check_range(min_v, max_v);
  return min_v + actual * (max_v - min_v) / 255.0;
}

GrayImage8 quantize(const DepthImage& img, double min_v, double max_v) {
  check_range(min_v, max_v);
  GrayImage8 q{img.width, img.height, {}};
  q.values.reserve(img.values.size());
  for (double v : img.values) q.values.push_back(quantize_value(v, min_v, max_v));
  return q;
}

DepthImage dequantize(const GrayImage8& q, double min_v, double max_v) {
  check_range(min_v, max_v);
  DepthImage img{q.width, q.height, min_v, max_v, {}};
  img.values.reserve(q.values.size());
  for (auto a : q.values) img.values.push_back(dequantize_value(a, min_v, max_v));
  return img;
}

RgbImage render_rgb(const EpisodeConfig& config, const CameraIntrinsics& cam, const Light& light,
                    std::span<const Obb> extra, const Palette& palette) {
  cam.validate();
  if (light.intensity < 0.0) throw Error(ErrorKind::RangeError, "light intensity must be non-negative");
  const auto boxes = collect_boxes(config, extra);
  RgbImage img{cam.width, cam.height, {}};
  img.values.assign(static_cast<std::size_t>(cam.width) * cam.height * 3, 0.0);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const PixelRay ray = pixel_ray(config.camera.pose, cam, r, c);
      const Hit hit = nearest_hit(boxes, ray.origin, ray.dir);
      if (!hit.box) continue;
      const Vec3 p = ray.origin + ray.dir * hit.t;
      const Vec3 n = face_normal(hit.box->box, p);
      const Vec3 to_light = light.position - p;
      const double cosine = norm(to_light) > 1e-12 ? std::max(0.0, dot(n, normalize(to_light))) : 0.0;
      std::array<double, 3> albedo = palette.support;
      if (hit.box->surface == Surface::Block && !palette.blocks.empty())
        albedo = palette.blocks[static_cast<std::size_t>(hit.box->block_index) % palette.blocks.size()];
      else if (hit.box->surface == Surface::Tool)
        albedo = palette.tool;
      for (int ch = 0; ch < 3; ++ch)
        img.values[(static_cast<std::size_t>(r) * cam.width + c) * 3 + ch] =
            std::clamp(albedo[ch] * light.intensity * cosine, 0.0, 1.0);
    }
  }
  return img;
}

Observation to_observation(const DepthImage& depth, const std::optional<RgbImage>& rgb, double min_v, double max_v,
                           std::optional<std::pair<int, int>> expected) {
  check_range(min_v, max_v);
  if (expected && (depth.width != expected->first || depth.height != expected->second))
    throw Error(ErrorKind::ShapeMismatch, "depth image does not match the configured resolution");
  if (rgb && (rgb->width != depth.width || rgb->height != depth.height))
    throw Error(ErrorKind::ShapeMismatch, "RGB and depth images differ in size");
  if (depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height)
    throw Error(ErrorKind::ShapeMismatch, "depth buffer size disagrees with its dimensions");

  Observation obs;
  obs.channels = rgb ? 4 : 1;
  obs.height = depth.height;
  obs.width = depth.width;
  const std::size_t plane = static_cast<std::size_t>(depth.width) * depth.height;
  obs.values.resize(plane * obs.channels);
  const double span = max_v - min_v;
  for (std::size_t i = 0; i < plane; ++i)
    obs.values[i] = static_cast<float>(std::clamp((depth.values[i] - min_v) / span, 0.0, 1.0));
  if (rgb) {
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t i = 0; i < plane; ++i)
        obs.values[plane * (ch + 1) + i] = static_cast<float>(rgb->values[i * 3 + ch]);
  }
  return obs;
}

}  // namespace grasp
