#pragma once

// Brute-force reference implementations used by the unit and acceptance suites.

#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "grasp/geom.hpp"

namespace grasp::oracle {

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Rotation::from_quaternion(n(rng), n(rng), n(rng), n(rng));
}

inline Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Obb random_obb(std::mt19937_64& rng, double center_range, double min_half, double max_half) {
  return Obb{random_vec(rng, -center_range, center_range), random_vec(rng, min_half, max_half), random_rotation(rng)};
}

// Ray/box distance by intersecting the six face planes one at a time: a hit on a face plane
// counts when the point lies within that face's rectangle.
inline std::optional<double> face_plane_hit(const Vec3& origin, const Vec3& dir, const Obb& box) {
  const Vec3 o = box.rotation.inverse_rotate(origin - box.center);
  const Vec3 d = box.rotation.inverse_rotate(dir);
  const std::array<double, 3> oo{o.x, o.y, o.z}, dd{d.x, d.y, d.z};
  const std::array<double, 3> h{box.half_extents.x, box.half_extents.y, box.half_extents.z};
  std::optional<double> best;
  for (int axis = 0; axis < 3; ++axis) {
    if (dd[axis] == 0.0) continue;
    for (double sign : {-1.0, 1.0}) {
      const double t = (sign * h[axis] - oo[axis]) / dd[axis];
      if (t < 0.0) continue;
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        if (k == axis) continue;
        if (std::abs(oo[k] + t * dd[k]) > h[k] * (1.0 + 1e-12) + 1e-12) inside = false;
      }
      if (inside && (!best || t < *best)) best = t;
    }
  }
  return best;
}

// March along the ray in fixed steps and report the first sample inside the box.
inline std::optional<double> march_hit(const Vec3& origin, const Vec3& dir, const Obb& box, double step, double t_max) {
  const bool starts_inside = box.contains(origin);
  for (double t = 0.0; t <= t_max; t += step) {
    const bool in = box.contains(origin + dir * t);
    if (in != starts_inside) return t;
  }
  return std::nullopt;
}

// Exact intersection test by vertex enumeration: a non-empty intersection of the two boxes is a
// polytope with a vertex on three of the twelve bounding planes.
inline bool overlap_by_vertices(const Obb& a, const Obb& b, double slack = 1e-12) {
  struct Plane {
    Vec3 n;
    double d;  // n . p <= d
  };
  std::vector<Plane> planes;
  for (const Obb* box : {&a, &b}) {
    const std::array<double, 3> h{box->half_extents.x, box->half_extents.y, box->half_extents.z};
    for (int i = 0; i < 3; ++i) {
      const Vec3 n = box->rotation.axis(i);
      const double c = dot(n, box->center);
      planes.push_back({n, c + h[i]});
      planes.push_back({n * -1.0, -(c - h[i])});
    }
  }
  auto feasible = [&](const Vec3& p) {
    for (const auto& pl : planes)
      if (dot(pl.n, p) > pl.d + slack) return false;
    return true;
  };
  const std::size_t n = planes.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Vec3 &a1 = planes[i].n, &a2 = planes[j].n, &a3 = planes[k].n;
        const double det = dot(a1, cross(a2, a3));
        if (std::abs(det) < 1e-12) continue;
        const Vec3 p = (cross(a2, a3) * planes[i].d + cross(a3, a1) * planes[j].d + cross(a1, a2) * planes[k].d) / det;
        if (feasible(p)) return true;
      }
  return false;
}

inline Obb grown(const Obb& b, double delta) {
  return Obb{b.center, b.half_extents + Vec3{delta, delta, delta}, b.rotation};
}

}  // namespace grasp::oracle
