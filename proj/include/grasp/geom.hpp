#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "grasp/error.hpp"

namespace grasp {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Throws Error(ZeroLength) when |v| <= 1e-12.
Vec3 normalize(const Vec3& v);

using Mat3 = std::array<std::array<double, 3>, 3>;

// Unit quaternion (w, x, y, z).
class Rotation {
 public:
  Rotation() = default;

  // Normalizes the input; throws ZeroLength for a zero quaternion.
  static Rotation from_quaternion(double w, double x, double y, double z);
  // Stores the components as given; throws ZeroLength unless the norm is 1 within 1e-9.
  static Rotation from_unit_quaternion(double w, double x, double y, double z);
  static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
  // Rotation about the vertical (world z) axis.
  static Rotation from_yaw_deg(double yaw_deg);
  // Columns of `m` are the rotated frame's axes expressed in the parent frame.
  static Rotation from_matrix(const Mat3& m);
  // Camera frame convention: +z looks along `forward`, +y points "down" (away from `up`).
  static Rotation look_at(const Vec3& forward, const Vec3& up);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  Vec3 rotate(const Vec3& v) const;
  Vec3 inverse_rotate(const Vec3& v) const;
  Rotation inverse() const { return Rotation(w_, -x_, -y_, -z_); }
  Mat3 matrix() const;
  // Heading of the rotated x axis in the xy plane, degrees in (-180, 180].
  double yaw_deg() const;
  // Column i of matrix(): the rotated basis vector e_i.
  Vec3 axis(int i) const;

  friend Rotation operator*(const Rotation& a, const Rotation& b);
  friend bool operator==(const Rotation&, const Rotation&) = default;

 private:
  Rotation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

struct Pose {
  Vec3 position;
  Rotation rotation;

  Vec3 transform_point(const Vec3& p) const { return position + rotation.rotate(p); }
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Obb {
  Vec3 center;
  Vec3 half_extents;
  Rotation rotation;

  double volume() const { return 8.0 * half_extents.x * half_extents.y * half_extents.z; }
  bool contains(const Vec3& p, double margin = 0.0) const;
  friend bool operator==(const Obb&, const Obb&) = default;
};

// Places a box given in a local frame into the frame described by `pose`.
Obb transform(const Obb& local, const Pose& pose);

// Smallest t >= 0 with origin + t*dir on the box surface. An origin inside the box
// yields the exit-face distance. `dir` must be unit length.
std::optional<double> ray_obb_intersect(const Vec3& origin, const Vec3& dir, const Obb& box);

// Separating-axis test over the 15 candidate axes. Separations below 1e-9 m count as touching.
bool obb_overlap(const Obb& a, const Obb& b);

enum class ShapeKind { Box, LShape, UShape };

std::string_view to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(std::string_view name);

// Union of axis-aligned parts in the shape-local frame. The local frame is centered on the
// bounding box of the union; the bottom face sits at z = -dims.z / 2.
struct ShapeModel {
  ShapeKind kind = ShapeKind::Box;
  Vec3 dims;
  double wall_thickness = 0.0;
  std::vector<Obb> parts;

  double volume() const;
};

// L: a full-width bar along -y plus an arm along -x. U: the same bar plus arms on both x ends.
// Throws BadDims for non-positive dims or a wall that does not fit the lateral dims.
ShapeModel compose_shape(ShapeKind kind, const Vec3& dims, double wall_thickness);

// Volume-weighted centroid of the parts, shape-local frame.
Vec3 shape_centroid(const ShapeModel& shape);

// Closed-form volume of the union for the given kind.
double expected_shape_volume(ShapeKind kind, const Vec3& dims, double wall_thickness);

// Wraps an angle into (-period/2, period/2].
double wrap_angle_deg(double deg, double period = 360.0);

}  // namespace grasp
