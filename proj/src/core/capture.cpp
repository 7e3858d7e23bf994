#include "rti/capture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "rti/common.hpp"
#include "rti/lighting_plan.hpp"
#include "rti/mission.hpp"
#include "rti/mpc.hpp"

namespace rti {

void SceneSpec::validate() const {
  require(width > 0 && height > 0, "scene size must be positive");
  require(std::isfinite(extent_m) && extent_m > 0.0, "scene extent must be positive");
  for (int c = 0; c < 3; ++c) {
    require(albedo[c] >= 0.0 && albedo[c] <= 1.0, "albedo must lie in [0, 1]");
    require(checker_albedo[c] >= 0.0 && checker_albedo[c] <= 1.0, "checker albedo must lie in [0, 1]");
  }
  require(checker_cells >= 0, "checker cell count must be non-negative");
  require(specular_strength >= 0.0 && specular_exponent > 0.0, "invalid specular parameters");
  for (const auto& f : features) {
    switch (f.kind) {
      case SceneFeature::Kind::Hemisphere:
        require(f.radius > 0.0, "hemisphere radius must be positive");
        break;
      case SceneFeature::Kind::Dome:
        require(f.radius > 0.0 && f.footprint > 0.0 && f.footprint <= f.radius,
                "dome needs 0 < footprint <= radius");
        break;
      case SceneFeature::Kind::Plane:
        require(std::isfinite(f.slope_u) && std::isfinite(f.slope_v), "plane slope must be finite");
        break;
    }
  }
}

SceneSpec SceneSpec::default_scene() {
  SceneSpec s;
  s.checker_cells = 8;
  SceneFeature bump;
  bump.kind = SceneFeature::Kind::Hemisphere;
  bump.radius = 0.12;
  s.features.push_back(bump);
  return s;
}

double Scene::u_of(int x) const { return (x + 0.5 - 0.5 * spec.width) * pixel_size; }
double Scene::v_of(int y) const { return (0.5 * spec.height - y - 0.5) * pixel_size; }

namespace {

// Height and gradient contribution of one feature at (u, v).
void add_feature(const SceneFeature& f, double u, double v, double& h, double& hu, double& hv) {
  if (f.kind == SceneFeature::Kind::Plane) {
    h += f.slope_u * u + f.slope_v * v;
    hu += f.slope_u;
    hv += f.slope_v;
    return;
  }
  const double du = u - f.cu, dv = v - f.cv;
  const double r2 = du * du + dv * dv;
  const double base = f.kind == SceneFeature::Kind::Hemisphere ? f.radius : f.footprint;
  if (r2 >= base * base) return;
  const double s = std::max(std::sqrt(f.radius * f.radius - r2), 1e-9 * f.radius);
  const double offset = f.kind == SceneFeature::Kind::Dome
                            ? std::sqrt(f.radius * f.radius - f.footprint * f.footprint)
                            : 0.0;
  h += s - offset;
  hu += -du / s;
  hv += -dv / s;
}

double bilinear_height(const Scene& scene, double u, double v) {
  const int w = scene.spec.width, hgt = scene.spec.height;
  const double fx = std::clamp(u / scene.pixel_size + 0.5 * w - 0.5, 0.0, w - 1.0);
  const double fy = std::clamp(0.5 * hgt - 0.5 - v / scene.pixel_size, 0.0, hgt - 1.0);
  const int x0 = std::min(static_cast<int>(fx), w - 1), y0 = std::min(static_cast<int>(fy), hgt - 1);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, hgt - 1);
  const double tx = fx - x0, ty = fy - y0;
  auto at = [&](int x, int y) { return scene.height[static_cast<std::size_t>(y) * w + x]; };
  return (1 - ty) * ((1 - tx) * at(x0, y0) + tx * at(x1, y0)) + ty * ((1 - tx) * at(x0, y1) + tx * at(x1, y1));
}

bool in_shadow(const Scene& scene, int x, int y, const Vec3& l, double max_height) {
  const double lh = std::hypot(l.x, l.y);
  if (lh < 1e-12) return false;
  if (l.z <= 0.0) return true;
  const double du = l.x / lh, dv = l.y / lh, rise = l.z / lh;
  const double u0 = scene.u_of(x), v0 = scene.v_of(y);
  const double h0 = scene.height[static_cast<std::size_t>(y) * scene.spec.width + x];
  const double half_u = 0.5 * scene.spec.width * scene.pixel_size;
  const double half_v = 0.5 * scene.spec.height * scene.pixel_size;
  const double step = 0.5 * scene.pixel_size;
  for (double s = step;; s += step) {
    const double u = u0 + du * s, v = v0 + dv * s, z = h0 + rise * s;
    if (z > max_height || std::abs(u) > half_u || std::abs(v) > half_v) return false;
    if (bilinear_height(scene, u, v) > z + 1e-6) return true;
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Scene Scene::build(const SceneSpec& spec) {
  spec.validate();
  Scene s;
  s.spec = spec;
  s.pixel_size = spec.extent_m / spec.width;
  const std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;
  s.height.assign(n, 0.0);
  s.normal.assign(n, Vec3{0, 0, 1});
  s.albedo.assign(n, spec.albedo);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * spec.width + x;
      double h = 0.0, hu = 0.0, hv = 0.0;
      for (const auto& f : spec.features) add_feature(f, s.u_of(x), s.v_of(y), h, hu, hv);
      s.height[i] = h;
      s.normal[i] = Vec3{-hu, -hv, 1.0}.normalized();
      if (spec.checker_cells > 0) {
        const int cx = x * spec.checker_cells / spec.width;
        const int cy = y * spec.checker_cells / spec.height;
        if ((cx + cy) % 2 == 1) s.albedo[i] = spec.checker_albedo;
      }
    }
  }
  return s;
}

ImageRgbF render_linear(const Scene& scene, const CameraModel& camera, const Vec3& ooi,
                        const Vec3& light_pos, double reference_distance) {
  require(reference_distance > 0.0, "reference distance must be positive");
  const LightingVector lv = lighting_vector(light_pos, ooi, camera);
  const Vec3 l{lv.u, lv.v, lv.w};
  const double r = distance(light_pos, ooi);
  const double falloff = (reference_distance / r) * (reference_distance / r);
  const auto& spec = scene.spec;
  const double max_height = *std::max_element(scene.height.begin(), scene.height.end());

  ImageRgbF img(spec.width, spec.height);
  parallel_for(static_cast<std::size_t>(spec.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < spec.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * spec.width + x;
      const Vec3& n = scene.normal[i];
      const double ndl = n.dot(l);
      if (ndl <= 0.0) continue;
      if (spec.shadowing && in_shadow(scene, x, y, l, max_height)) continue;
      double highlight = 0.0;
      if (spec.specular_strength > 0.0) {
        const double rz = 2.0 * ndl * n.z - l.z;  // reflected light against view (0, 0, 1)
        if (rz > 0.0) highlight = spec.specular_strength * std::pow(rz, spec.specular_exponent);
      }
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<float>((kExposure * scene.albedo[i][c] * ndl + highlight) * falloff);
    }
  });
  return img;
}

ImageRgb8 render(const Scene& scene, const CameraModel& camera, const Vec3& ooi,
                 const Vec3& light_pos, double reference_distance) {
  return quantize(render_linear(scene, camera, ooi, light_pos, reference_distance));
}

Pose perturb_localization(const Pose& pose, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && std::isfinite(sigma), "noise sigma must be non-negative");
  if (sigma == 0.0) return pose;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pos(0.0, sigma);
  std::normal_distribution<double> ang(0.0, 2.0 * kPi * sigma / 36.0);
  Pose out = pose;
  out.position.x += pos(rng);
  out.position.y += pos(rng);
  out.position.z += pos(rng);
  out.yaw += ang(rng);
  out.pitch += ang(rng);
  return out;
}

std::vector<LightingVector> CaptureSet::recorded_lights() const {
  std::vector<LightingVector> out;
  out.reserve(captures.size());
  for (const auto& c : captures) out.push_back(c.recorded);
  return out;
}

std::vector<ImageRgb8> render_captures(const Scene& scene, const CameraModel& camera,
                                       const Vec3& ooi, const std::vector<Pose>& lights,
                                       double reference_distance) {
  std::vector<ImageRgb8> images;
  images.reserve(lights.size());
  for (const auto& l : lights) images.push_back(render(scene, camera, ooi, l.position, reference_distance));
  return images;
}

std::vector<RecordedLight> record_lights(const CameraModel& camera, const Vec3& ooi,
                                         const std::vector<Pose>& lights, double sigma,
                                         std::uint64_t seed) {
  std::vector<RecordedLight> out;
  out.reserve(lights.size());
  const Pose cam_pose{camera.position, camera.yaw, camera.pitch};
  for (std::size_t i = 0; i < lights.size(); ++i) {
    const Pose light = perturb_localization(lights[i], sigma, mix_seed(seed, 2 * i));
    const Pose cam = perturb_localization(cam_pose, sigma, mix_seed(seed, 2 * i + 1));
    CameraModel noisy = camera;
    noisy.position = cam.position;
    noisy.yaw = cam.yaw;
    noisy.pitch = cam.pitch;
    RecordedLight r;
    r.truth = lighting_vector(lights[i].position, ooi, camera);
    r.recorded = lighting_vector(light.position, ooi, noisy);
    r.recorded_position = light.position;
    out.push_back(r);
  }
  return out;
}

CaptureSet assemble_captures(const CameraModel& camera, const Vec3& ooi,
                             const std::vector<Pose>& lights, std::vector<ImageRgb8> images,
                             double sigma, std::uint64_t seed) {
  require(images.size() == lights.size(), "one image per light is required");
  const auto recorded = record_lights(camera, ooi, lights, sigma, seed);
  CaptureSet set;
  set.camera = camera;
  set.ooi = ooi;
  set.sigma = sigma;
  set.seed = seed;
  for (std::size_t i = 0; i < lights.size(); ++i) {
    Capture c;
    char name[32];
    std::snprintf(name, sizeof name, "capture_%03zu.png", i);
    c.name = name;
    c.image = std::move(images[i]);
    c.recorded = recorded[i].recorded;
    c.truth = recorded[i].truth;
    c.true_position = lights[i].position;
    c.recorded_position = recorded[i].recorded_position;
    set.captures.push_back(std::move(c));
  }
  set.few_captures = set.captures.size() < kMinCaptures;
  return set;
}

CaptureSet run_capture(const std::vector<Pose>& lights, const Scene& scene,
                       const CameraModel& camera, const Vec3& ooi, double reference_distance,
                       double sigma, std::uint64_t seed) {
  camera.validate();
  auto images = render_captures(scene, camera, ooi, lights, reference_distance);
  return assemble_captures(camera, ooi, lights, std::move(images), sigma, seed);
}

CaptureSet run_capture(const MissionLog& log, const Scene& scene, double reference_distance,
                       double sigma, std::uint64_t seed) {
  std::vector<Pose> lights;
  for (const auto& c : log.captures) lights.push_back({c.true_position, c.light_yaw, c.light_pitch});
  return run_capture(lights, scene, log.camera, log.ooi, reference_distance, sigma, seed);
}

CaptureSet run_capture(const LightingPlan& plan, const Scene& scene, const CameraModel& camera,
                       double sigma, std::uint64_t seed) {
  std::vector<Pose> lights;
  for (const auto& p : plan.positions) {
    const Bearing b = desired_bearing(p, plan.region.ooi);
    lights.push_back({p, b.yaw, b.pitch});
  }
  return run_capture(lights, scene, camera, plan.region.ooi, plan.region.distance, sigma, seed);
}

}  // namespace rti
