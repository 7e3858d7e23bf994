#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rti/geometry.hpp"
#include "rti/image.hpp"

namespace rti {

struct LightingPlan;
struct MissionLog;

// Procedural relief features. Heights and gradients are analytic, so the
// scene carries exact per-pixel normals for validation.
struct SceneFeature {
  enum class Kind { Hemisphere, Dome, Plane };
  Kind kind = Kind::Hemisphere;
  double cu = 0.0, cv = 0.0;  // centre in surface coordinates, metres
  double radius = 0.0;        // sphere radius (hemisphere, dome)
  double footprint = 0.0;     // dome base radius, <= radius
  double slope_u = 0.0, slope_v = 0.0;  // plane gradient
};

struct SceneSpec {
  int width = 128;
  int height = 128;
  double extent_m = 0.4;  // patch width; pixels are square
  std::array<double, 3> albedo{0.8, 0.75, 0.7};
  std::array<double, 3> checker_albedo{0.55, 0.6, 0.5};
  int checker_cells = 0;  // 0 disables the checker pattern
  std::vector<SceneFeature> features;
  double specular_strength = 0.0;
  double specular_exponent = 20.0;
  bool shadowing = false;

  void validate() const;
  static SceneSpec default_scene();  // hemisphere bump on a checkered ground
};

// Orthographic relief facing the camera. Surface coordinates (u, v) match the
// lighting-vector frame: u to the image right, v up, height along w.
struct Scene {
  SceneSpec spec;
  double pixel_size = 0.0;
  std::vector<double> height;  // metres, row-major, top row first
  std::vector<Vec3> normal;    // unit, analytic
  std::vector<std::array<double, 3>> albedo;

  static Scene build(const SceneSpec& spec);
  int width() const { return spec.width; }
  int height_px() const { return spec.height; }
  double u_of(int x) const;
  double v_of(int y) const;
};

inline constexpr double kExposure = 0.8;

// Linear radiance before quantization. `reference_distance` is the distance
// at which the inverse-square falloff equals one.
ImageRgbF render_linear(const Scene& scene, const CameraModel& camera, const Vec3& ooi,
                        const Vec3& light_pos, double reference_distance);
ImageRgb8 render(const Scene& scene, const CameraModel& camera, const Vec3& ooi,
                 const Vec3& light_pos, double reference_distance);

struct Pose {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
};

// Localization noise: per-axis position std sigma, per-angle std 2*pi*sigma/36.
Pose perturb_localization(const Pose& pose, double sigma, std::uint64_t seed);

struct Capture {
  std::string name;
  ImageRgb8 image;
  LightingVector recorded;
  LightingVector truth;
  Vec3 true_position;
  Vec3 recorded_position;
};

struct CaptureSet {
  CameraModel camera;
  Vec3 ooi;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<Capture> captures;
  bool few_captures = false;  // fewer than six, too few for a PTM fit

  std::vector<LightingVector> recorded_lights() const;
};

inline constexpr std::size_t kMinCaptures = 6;

// Renders one image per light with the true pose; noise only reaches the
// recorded lighting vectors.
std::vector<ImageRgb8> render_captures(const Scene& scene, const CameraModel& camera,
                                       const Vec3& ooi, const std::vector<Pose>& lights,
                                       double reference_distance);

struct RecordedLight {
  LightingVector recorded;
  LightingVector truth;
  Vec3 recorded_position;
};

std::vector<RecordedLight> record_lights(const CameraModel& camera, const Vec3& ooi,
                                         const std::vector<Pose>& lights, double sigma,
                                         std::uint64_t seed);

CaptureSet assemble_captures(const CameraModel& camera, const Vec3& ooi,
                             const std::vector<Pose>& lights, std::vector<ImageRgb8> images,
                             double sigma, std::uint64_t seed);

CaptureSet run_capture(const std::vector<Pose>& lights, const Scene& scene,
                       const CameraModel& camera, const Vec3& ooi, double reference_distance,
                       double sigma, std::uint64_t seed);
CaptureSet run_capture(const MissionLog& log, const Scene& scene, double reference_distance,
                       double sigma, std::uint64_t seed);
// Every plan position except P_i, lights aimed at the OoI.
CaptureSet run_capture(const LightingPlan& plan, const Scene& scene, const CameraModel& camera,
                       double sigma, std::uint64_t seed);

}  // namespace rti
