#include <doctest.h>

#include <cmath>
#include <random>

#include "rti/common.hpp"
#include "rti/geometry.hpp"

using namespace rti;

namespace {

CameraModel level_camera(double aov_h = kPi / 2.0, double aov_v = kPi / 4.0) {
  CameraModel c;
  c.aov_h = aov_h;
  c.aov_v = aov_v;
  return c;
}

Vec3 rotate_z(const Vec3& p, double a) {
  return {std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y, p.z};
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("camera frame is orthonormal and right-handed") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> yaw(-kPi, kPi), pitch(-1.2, 1.2);
  for (int i = 0; i < 100; ++i) {
    const CameraFrame f = camera_frame(yaw(rng), pitch(rng));
    CHECK(f.forward.norm() == doctest::Approx(1.0));
    CHECK(f.right.norm() == doctest::Approx(1.0));
    CHECK(f.up.norm() == doctest::Approx(1.0));
    CHECK(std::abs(f.forward.dot(f.right)) < 1e-12);
    CHECK(std::abs(f.forward.dot(f.up)) < 1e-12);
    CHECK((f.right.cross(f.forward) - f.up).norm() < 1e-12);
  }
}

TEST_CASE("light on the camera axis has a zero lighting vector") {
  const CameraModel cam = level_camera();
  const Vec3 ooi{5.0, 0.0, 0.0};
  for (double d : {0.5, 2.0, 4.9}) {
    const LightingVector l = lighting_vector({5.0 - d, 0.0, 0.0}, ooi, cam);
    CHECK(std::abs(l.u) < 1e-15);
    CHECK(std::abs(l.v) < 1e-15);
    CHECK(l.w == doctest::Approx(1.0));
    CHECK(l.valid);
  }
}

TEST_CASE("light 30 degrees off the axis gives |l_u| = 0.5") {
  const CameraModel cam = level_camera();
  const Vec3 ooi{5.0, 0.0, 0.0};
  // Right of the camera is -y for yaw 0.
  const double a = kPi / 6.0;
  const Vec3 light = ooi + Vec3{-std::cos(a), -std::sin(a), 0.0} * 2.0;
  const LightingVector l = lighting_vector(light, ooi, cam);
  CHECK(l.u == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(l.v) < 1e-12);
  CHECK(l.w == doctest::Approx(std::cos(a)));

  // The literal coordinates (5, 5 tan 30deg, 0) sit 90 degrees off the axis.
  const LightingVector side = lighting_vector({5.0, 5.0 * std::tan(a), 0.0}, ooi, cam);
  CHECK(std::abs(side.u) == doctest::Approx(1.0));
  CHECK(std::abs(side.v) < 1e-12);
}

TEST_CASE("lighting vector signs follow camera right and up") {
  const CameraModel cam = level_camera();
  const Vec3 ooi{5.0, 0.0, 0.0};
  CHECK(lighting_vector({4.0, 0.0, 1.0}, ooi, cam).v > 0.0);
  CHECK(lighting_vector({4.0, 0.0, -1.0}, ooi, cam).v < 0.0);
  CHECK(lighting_vector({4.0, -1.0, 0.0}, ooi, cam).u > 0.0);
}

TEST_CASE("coincident light and OoI is degenerate") {
  const Vec3 ooi{5.0, 0.0, 0.0};
  try {
    lighting_vector(ooi, ooi, level_camera());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }
}

TEST_CASE("light behind the surface plane is flagged") {
  const LightingVector l = lighting_vector({7.0, 0.5, 0.0}, {5.0, 0.0, 0.0}, level_camera());
  CHECK_FALSE(l.valid);
  CHECK(l.w < 0.0);
}

TEST_CASE("lighting vectors stay in the unit disc") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-4.0, 4.0);
  const CameraModel cam = level_camera();
  const Vec3 ooi{5.0, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p{c(rng) + 3.0, c(rng), c(rng)};
    if (distance(p, ooi) < 1e-6) continue;
    const LightingVector l = lighting_vector(p, ooi, cam);
    CHECK(l.u * l.u + l.v * l.v <= 1.0 + 1e-12);
    CHECK(l.u * l.u + l.v * l.v + l.w * l.w == doctest::Approx(1.0));
  }
}

TEST_CASE("fov distance to a perpendicular light is the border-plane distance") {
  const CameraModel cam = level_camera(kPi / 2.0);
  const Vec3 light{0.0, 5.0, 0.0};
  // Independent oracle: distance from the point to the plane through the
  // camera containing the 45 degree border ray and the vertical axis.
  const Vec3 border_normal = Vec3{-1.0, 1.0, 0.0}.normalized();
  const double plane_distance = std::abs(light.dot(border_normal));
  const FovDistance d = fov_components(light, cam);
  CHECK(d.horizontal == doctest::Approx(5.0 * std::sin(kPi / 4.0)).epsilon(1e-12));
  CHECK(d.horizontal == doctest::Approx(plane_distance).epsilon(1e-12));
  CHECK(d.total == doctest::Approx(3.5355339059327378).epsilon(1e-12));
}

TEST_CASE("light on the rear axis is inside the mirrored wedge") {
  const CameraModel cam = level_camera();
  CHECK(fov_distance({-3.0, 0.0, 0.0}, cam) < 0.0);
  CHECK(fov_distance({3.0, 0.0, 0.0}, cam) < 0.0);
}

TEST_CASE("light on a border plane has zero fov distance") {
  const CameraModel cam = level_camera(kPi / 2.0);
  CHECK(std::abs(fov_distance({5.0, 5.0, 0.0}, cam)) < 1e-12);
  CHECK(std::abs(fov_distance({-5.0, 5.0, 0.0}, cam)) < 1e-12);
}

TEST_CASE("body radius shifts the fov distance") {
  CameraModel cam = level_camera(kPi / 2.0);
  const double bare = fov_distance({0.0, 5.0, 0.0}, cam);
  cam.body_radius = 0.3;
  CHECK(fov_distance({0.0, 5.0, 0.0}, cam) == doctest::Approx(bare - 0.3));
}

TEST_CASE("fov distance at the camera is degenerate") {
  try {
    fov_distance({0.0, 0.0, 0.0}, level_camera());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }
}

TEST_CASE("fov distance is invariant under the rear fold") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0), ang(-kPi, kPi), pitch(-0.8, 0.8),
      aov(0.3, 2.0);
  for (int i = 0; i < 500; ++i) {
    CameraModel cam;
    cam.position = {u(rng), u(rng), u(rng)};
    cam.yaw = ang(rng);
    cam.pitch = pitch(rng);
    cam.aov_h = aov(rng);
    cam.aov_v = aov(rng);
    const Vec3 light = cam.position + Vec3{u(rng), u(rng), u(rng)};
    const Vec3 f = camera_frame(cam.yaw, cam.pitch).forward;
    const Vec3 rel = light - cam.position;
    const Vec3 mirrored = cam.position + rel - f * (2.0 * rel.dot(f));
    CHECK(fov_distance(mirrored, cam) == doctest::Approx(fov_distance(light, cam)).epsilon(1e-9));
  }
}

TEST_CASE("fov distance is invariant under joint rotation about the vertical") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0), ang(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    CameraModel cam = level_camera(1.0, 0.7);
    cam.position = {u(rng), u(rng), u(rng)};
    cam.yaw = ang(rng);
    cam.pitch = 0.3;
    const Vec3 light = cam.position + Vec3{u(rng), u(rng), u(rng)};
    const double before = fov_distance(light, cam);
    const double a = ang(rng);
    CameraModel rotated = cam;
    rotated.position = rotate_z(cam.position, a);
    rotated.yaw = normalize_angle(cam.yaw + a);
    CHECK(std::abs(fov_distance(rotate_z(light, a), rotated) - before) < 1e-9);
  }
}

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(normalize_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("invalid camera angles are rejected") {
  CameraModel cam;
  cam.aov_h = 0.0;
  CHECK_THROWS_AS(cam.validate(), Error);
  cam.aov_h = kPi;
  CHECK_THROWS_AS(cam.validate(), Error);
}

}
