#pragma once

#include <cmath>
#include <numbers>

namespace rti {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  constexpr double squared_norm() const { return dot(*this); }
  Vec3 normalized() const { return *this / norm(); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

// Pinhole camera pose plus the angular extent of its field of view. Yaw turns
// about +z from +x, pitch raises the optical axis above the horizontal plane.
struct CameraModel {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
  double aov_h = kPi / 3.0;
  double aov_v = kPi / 4.0;
  double body_radius = 0.0;

  void validate() const;
};

// Orthonormal camera frame: forward is the optical axis, right and up span
// the image plane.
struct CameraFrame {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

CameraFrame camera_frame(double yaw, double pitch);

// Direction of a light expressed in image-plane components. w points toward
// the camera; `valid` is false when the light sits behind the surface plane.
struct LightingVector {
  double u = 0.0;
  double v = 0.0;
  double w = 1.0;
  bool valid = true;

  static LightingVector from_uv(double u, double v);
};

// Unit direction OoI -> light projected onto the camera frame
// (u = camera right, v = camera up, w = toward the camera).
LightingVector lighting_vector(const Vec3& light_pos, const Vec3& ooi_pos,
                               const CameraModel& camera);

// Angle between two lighting vectors treated as unit 3D directions.
double angular_gap(const LightingVector& a, const LightingVector& b);

struct FovDistance {
  double horizontal = 0.0;  // signed distance to the nearest vertical border
  double vertical = 0.0;    // signed distance to the nearest horizontal border
  double total = 0.0;       // signed distance to the wedge, minus the body radius
};

// Signed distance from a light to the camera's field-of-view wedge and its
// rear mirror. Positive outside, zero on a border, negative inside.
FovDistance fov_components(const Vec3& light_pos, const CameraModel& camera);

inline double fov_distance(const Vec3& light_pos, const CameraModel& camera) {
  return fov_components(light_pos, camera).total;
}

}  // namespace rti
