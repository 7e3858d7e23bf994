#include "rti/geometry.hpp"

#include <algorithm>

#include "rti/common.hpp"

namespace rti {

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

void CameraModel::validate() const {
  require(aov_h > 0.0 && aov_h < kPi, "camera horizontal angle of view must lie in (0, pi)");
  require(aov_v > 0.0 && aov_v < kPi, "camera vertical angle of view must lie in (0, pi)");
  require(body_radius >= 0.0, "camera body radius must be non-negative");
}

CameraFrame camera_frame(double yaw, double pitch) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  CameraFrame f;
  f.forward = {cp * cy, cp * sy, sp};
  f.right = {sy, -cy, 0.0};
  f.up = f.right.cross(f.forward);
  return f;
}

LightingVector LightingVector::from_uv(double u, double v) {
  LightingVector l;
  l.u = u;
  l.v = v;
  const double r2 = u * u + v * v;
  l.w = std::sqrt(std::max(0.0, 1.0 - r2));
  l.valid = r2 <= 1.0;
  return l;
}

LightingVector lighting_vector(const Vec3& light_pos, const Vec3& ooi_pos,
                               const CameraModel& camera) {
  const Vec3 d = light_pos - ooi_pos;
  const double len = d.norm();
  if (!(len > 0.0))
    fail(ErrorCode::DegenerateGeometry, "light position coincides with the object of interest");
  const Vec3 dir = d / len;
  const CameraFrame f = camera_frame(camera.yaw, camera.pitch);
  LightingVector l;
  l.u = dir.dot(f.right);
  l.v = dir.dot(f.up);
  l.w = -dir.dot(f.forward);
  l.valid = l.w >= 0.0;
  return l;
}

double angular_gap(const LightingVector& a, const LightingVector& b) {
  const Vec3 va{a.u, a.v, a.w};
  const Vec3 vb{b.u, b.v, b.w};
  const double c = va.dot(vb) / (va.norm() * vb.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

FovDistance fov_components(const Vec3& light_pos, const CameraModel& camera) {
  const Vec3 d = light_pos - camera.position;
  const double dist = d.norm();
  if (!(dist > 0.0))
    fail(ErrorCode::DegenerateGeometry, "light position coincides with the camera");
  const CameraFrame f = camera_frame(camera.yaw, camera.pitch);
  const double along = d.dot(f.forward);
  const double side = d.dot(f.right);
  const double lift = d.dot(f.up);

  // Angles from the optical axis in [0, pi]; folding with pi - a maps the
  // rear (virtual) camera's wedge onto the real one.
  const double alpha_h = std::abs(normalize_angle(std::atan2(side, along)));
  const double alpha_v = std::abs(normalize_angle(std::atan2(lift, along)));
  const double beta_h = std::min(alpha_h, kPi - alpha_h);
  const double beta_v = std::min(alpha_v, kPi - alpha_v);

  const double d_xy = std::hypot(along, side);
  FovDistance out;
  out.horizontal = d_xy * std::sin(beta_h - 0.5 * camera.aov_h);
  out.vertical = dist * std::sin(beta_v - 0.5 * camera.aov_v);

  // Signed distance to the intersection of both slabs: outside composes the
  // positive parts, inside is the nearest border.
  const double a = out.horizontal, b = out.vertical;
  const double outside = std::hypot(std::max(a, 0.0), std::max(b, 0.0));
  const double inside = std::min(std::max(a, b), 0.0);
  out.total = outside + inside - camera.body_radius;
  return out;
}

}  // namespace rti
