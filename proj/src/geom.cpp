#include "grasp/geom.hpp"

#include <algorithm>
#include <limits>

#include "grasp/error.hpp"

namespace grasp {

Vec3 normalize(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 1e-12)) throw Error(ErrorKind::ZeroLength, "cannot normalize a vector of length <= 1e-12");
  return v / n;
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-12)) throw Error(ErrorKind::ZeroLength, "zero quaternion");
  return Rotation(w / n, x / n, y / n, z / n);
}

Rotation Rotation::from_unit_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(n - 1.0) > 1e-9) throw Error(ErrorKind::ZeroLength, "quaternion is not unit length");
  return Rotation(w, x, y, z);
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle_rad) {
  const Vec3 u = normalize(axis);
  const double s = std::sin(angle_rad / 2.0);
  return from_quaternion(std::cos(angle_rad / 2.0), u.x * s, u.y * s, u.z * s);
}

Rotation Rotation::from_yaw_deg(double yaw_deg) {
  const double half = deg_to_rad(yaw_deg) / 2.0;
  return Rotation(std::cos(half), 0.0, 0.0, std::sin(half));
}

Rotation Rotation::from_matrix(const Mat3& m) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  const double trace = m[0][0] + m[1][1] + m[2][2];
  double w, x, y, z;
  if (trace > 0.0) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    w = 0.25 * s;
    x = (m[2][1] - m[1][2]) / s;
    y = (m[0][2] - m[2][0]) / s;
    z = (m[1][0] - m[0][1]) / s;
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
    w = (m[2][1] - m[1][2]) / s;
    x = 0.25 * s;
    y = (m[0][1] + m[1][0]) / s;
    z = (m[0][2] + m[2][0]) / s;
  } else if (m[1][1] > m[2][2]) {
    const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
    w = (m[0][2] - m[2][0]) / s;
    x = (m[0][1] + m[1][0]) / s;
    y = 0.25 * s;
    z = (m[1][2] + m[2][1]) / s;
  } else {
    const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
    w = (m[1][0] - m[0][1]) / s;
    x = (m[0][2] + m[2][0]) / s;
    y = (m[1][2] + m[2][1]) / s;
    z = 0.25 * s;
  }
  return from_quaternion(w, x, y, z);
}

Rotation Rotation::look_at(const Vec3& forward, const Vec3& up) {
  const Vec3 zc = normalize(forward);
  Vec3 side = cross(zc, up);
  if (norm(side) < 1e-9) side = cross(zc, Vec3{0.0, 1.0, 0.0});  // looking along `up`
  const Vec3 xc = normalize(side);
  const Vec3 yc = cross(zc, xc);
  Mat3 m{};
  for (int r = 0; r < 3; ++r) {
    m[r][0] = xc[r];
    m[r][1] = yc[r];
    m[r][2] = zc[r];
  }
  return from_matrix(m);
}

Vec3 Rotation::rotate(const Vec3& v) const {
  // v' = v + 2w (q x v) + 2 q x (q x v)
  const Vec3 q{x_, y_, z_};
  const Vec3 t = 2.0 * cross(q, v);
  return v + w_ * t + cross(q, t);
}

Vec3 Rotation::inverse_rotate(const Vec3& v) const { return inverse().rotate(v); }

Mat3 Rotation::matrix() const {
  const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  return Mat3{{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
               {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
               {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
}

Vec3 Rotation::axis(int i) const {
  const Mat3 m = matrix();
  return {m[0][i], m[1][i], m[2][i]};
}

double Rotation::yaw_deg() const {
  const Vec3 ex = rotate({1, 0, 0});
  return wrap_angle_deg(rad_to_deg(std::atan2(ex.y, ex.x)));
}

Rotation operator*(const Rotation& a, const Rotation& b) {
  return Rotation(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                  a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                  a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                  a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

bool Obb::contains(const Vec3& p, double margin) const {
  const Vec3 local = rotation.inverse_rotate(p - center);
  return std::abs(local.x) <= half_extents.x + margin && std::abs(local.y) <= half_extents.y + margin &&
         std::abs(local.z) <= half_extents.z + margin;
}

Obb transform(const Obb& local, const Pose& pose) {
  return Obb{pose.transform_point(local.center), local.half_extents, pose.rotation * local.rotation};
}

std::optional<double> ray_obb_intersect(const Vec3& origin, const Vec3& dir, const Obb& box) {
  const Vec3 o = box.rotation.inverse_rotate(origin - box.center);
  const Vec3 d = box.rotation.inverse_rotate(dir);
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double h = box.half_extents[i];
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < -h || o[i] > h) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / d[i];
    double t0 = (-h - o[i]) * inv;
    double t1 = (h - o[i]) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_far < 0.0) return std::nullopt;
  return t_near >= 0.0 ? t_near : t_far;
}

bool obb_overlap(const Obb& a, const Obb& b) {
  constexpr double kTouch = 1e-9;
  const Mat3 ma = a.rotation.matrix();
  const Mat3 mb = b.rotation.matrix();
  std::array<Vec3, 3> ax, bx;
  for (int i = 0; i < 3; ++i) {
    ax[i] = {ma[0][i], ma[1][i], ma[2][i]};
    bx[i] = {mb[0][i], mb[1][i], mb[2][i]};
  }
  const Vec3 delta = b.center - a.center;

  auto separated_along = [&](const Vec3& axis) {
    double ra = 0.0, rb = 0.0;
    for (int i = 0; i < 3; ++i) {
      ra += a.half_extents[i] * std::abs(dot(ax[i], axis));
      rb += b.half_extents[i] * std::abs(dot(bx[i], axis));
    }
    return std::abs(dot(delta, axis)) - (ra + rb) >= kTouch;
  };

  for (int i = 0; i < 3; ++i) {
    if (separated_along(ax[i]) || separated_along(bx[i])) return false;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = cross(ax[i], bx[j]);
      const double n = norm(c);
      if (n < 1e-9) continue;  // parallel edges; covered by the face axes
      if (separated_along(c / n)) return false;
    }
  }
  return true;
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::LShape: return "l_shape";
    case ShapeKind::UShape: return "u_shape";
  }
  return "box";
}

ShapeKind shape_kind_from_string(std::string_view name) {
  if (name == "box") return ShapeKind::Box;
  if (name == "l_shape") return ShapeKind::LShape;
  if (name == "u_shape") return ShapeKind::UShape;
  throw Error(ErrorKind::Config, "unknown shape kind '" + std::string(name) + "'");
}

namespace {

// Axis-aligned local box from its min/max corners.
Obb span_box(const Vec3& lo, const Vec3& hi) {
  return Obb{(lo + hi) * 0.5, (hi - lo) * 0.5, Rotation{}};
}

}  // namespace

double ShapeModel::volume() const {
  double v = 0.0;
  for (const auto& p : parts) v += p.volume();
  return v;
}

ShapeModel compose_shape(ShapeKind kind, const Vec3& dims, double wall_thickness) {
  if (!(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0) || !is_finite(dims))
    throw Error(ErrorKind::BadDims, "shape dims must be positive");
  ShapeModel shape{kind, dims, wall_thickness, {}};
  const Vec3 lo = dims * -0.5;
  const Vec3 hi = dims * 0.5;
  if (kind == ShapeKind::Box) {
    shape.parts.push_back(span_box(lo, hi));
    return shape;
  }

  const double t = wall_thickness;
  if (!(t > 0.0 && t < std::min(dims.x, dims.y)))
    throw Error(ErrorKind::BadDims, "wall thickness must lie in (0, min lateral dim)");
  if (kind == ShapeKind::UShape && !(2.0 * t < dims.x))
    throw Error(ErrorKind::BadDims, "U-shape arms overlap: 2 * wall thickness must be below dims.x");

  // Bar along the -y edge spanning the full x extent.
  shape.parts.push_back(span_box(lo, {hi.x, lo.y + t, hi.z}));
  // Arm along the -x edge.
  shape.parts.push_back(span_box({lo.x, lo.y + t, lo.z}, {lo.x + t, hi.y, hi.z}));
  if (kind == ShapeKind::UShape) {
    // Mirror arm along the +x edge.
    shape.parts.push_back(span_box({hi.x - t, lo.y + t, lo.z}, {hi.x, hi.y, hi.z}));
  }
  return shape;
}

Vec3 shape_centroid(const ShapeModel& shape) {
  Vec3 acc;
  double total = 0.0;
  for (const auto& p : shape.parts) {
    const double v = p.volume();
    acc += p.center * v;
    total += v;
  }
  return acc / total;
}

double expected_shape_volume(ShapeKind kind, const Vec3& dims, double t) {
  const double full = dims.x * dims.y * dims.z;
  switch (kind) {
    case ShapeKind::Box: return full;
    case ShapeKind::LShape: return full - (dims.x - t) * (dims.y - t) * dims.z;
    case ShapeKind::UShape: return full - (dims.x - 2.0 * t) * (dims.y - t) * dims.z;
  }
  return full;
}

double wrap_angle_deg(double deg, double period) {
  double r = std::fmod(deg, period);
  const double half = period / 2.0;
  if (r > half) r -= period;
  if (r <= -half) r += period;
  return r;
}

}  // namespace grasp
