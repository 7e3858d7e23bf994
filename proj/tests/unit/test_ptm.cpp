#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "rti/capture.hpp"
#include "rti/common.hpp"
#include "rti/experiments.hpp"
#include "rti/lighting_plan.hpp"
#include "rti/ptm.hpp"

using namespace rti;
namespace fs = std::filesystem;

namespace {

std::vector<LightingVector> ring_lights(std::size_t n, double radius = 0.6) {
  std::vector<LightingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const double r = radius * (0.5 + 0.5 * static_cast<double>(i % 3) / 2.0);
    out.push_back(LightingVector::from_uv(r * std::cos(a), r * std::sin(a)));
  }
  return out;
}

// Images whose every pixel follows the given polynomial per channel.
std::vector<ImageRgbF> model_images(const std::vector<LightingVector>& lights, int w, int h,
                                    const std::array<double, kPtmTerms>& alpha) {
  std::vector<ImageRgbF> out;
  for (const auto& l : lights) {
    const auto b = ptm_basis(l.u, l.v);
    double v = 0.0;
    for (int t = 0; t < kPtmTerms; ++t) v += alpha[t] * b[t];
    ImageRgbF img(w, h);
    std::fill(img.data.begin(), img.data.end(), static_cast<float>(v));
    out.push_back(img);
  }
  return out;
}

PtmCoefficients uniform_coefficients(int w, int h, const std::array<double, kPtmTerms>& alpha) {
  PtmCoefficients c(w, h);
  for (int t = 0; t < kPtmTerms; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < c.pixels(); ++p) c.at(ptm_plane(t, ch), p) = alpha[t];
  return c;
}

NormalMap uniform_map(int w, int h, const Vec3& n) {
  NormalMap m;
  m.width = w;
  m.height = h;
  m.normals.assign(static_cast<std::size_t>(w) * h, n);
  m.valid.assign(static_cast<std::size_t>(w) * h, 1);
  return m;
}

ScanRegion axis_cap() { return NoiseSweepConfig::default_region(); }

CaptureSet plan_captures(std::size_t target, const SceneSpec& spec) {
  const ScanRegion r = axis_cap();
  const LightingPlan plan = sppa_plan_near_count(r, target, {3.0, -1.0, 1.0});
  return run_capture(plan, Scene::build(spec), CameraModel{}, 0.0, 1);
}

// Mean absolute difference in 8-bit steps.
double mean_abs_error(const ImageRgb8& a, const ImageRgb8& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
  return sum / static_cast<double>(a.data.size());
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rti_unit_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("ptm") {

TEST_CASE("model-class data is recovered before quantization") {
  const auto lights = ring_lights(12);
  const auto imgs = model_images(lights, 4, 3, {0.0, 0.0, 0.0, 0.3, 0.0, 0.5});
  const PtmCoefficients c = fit_ptm_coefficients(lights, imgs);
  const double expected[] = {0.0, 0.0, 0.0, 0.3, 0.0, 0.5};
  for (int t = 0; t < kPtmTerms; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < c.pixels(); ++p) CHECK(std::abs(c.at(ptm_plane(t, ch), p) - expected[t]) < 1e-6);
}

TEST_CASE("full quadratic is recovered") {
  const auto lights = ring_lights(20);
  const std::array<double, kPtmTerms> alpha{-0.4, -0.3, 0.1, 0.2, -0.15, 0.7};
  const PtmCoefficients c = fit_ptm_coefficients(lights, model_images(lights, 2, 2, alpha));
  for (int t = 0; t < kPtmTerms; ++t) CHECK(std::abs(c.at(ptm_plane(t, 1), 3) - alpha[t]) < 1e-6);
}

TEST_CASE("constant images fit a constant") {
  std::vector<Pose> poses;
  const CameraModel cam;
  const Vec3 ooi{3.0, 0.0, 0.0};
  CaptureSet set;
  set.camera = cam;
  set.ooi = ooi;
  for (const auto& l : ring_lights(9)) {
    Capture c;
    c.recorded = c.truth = l;
    c.image = ImageRgb8(5, 4);
    std::fill(c.image.data.begin(), c.image.data.end(), std::uint8_t{140});
    set.captures.push_back(c);
  }
  const PtmImage ptm = fit_ptm(set);
  const PtmCoefficients c = dequantize_ptm(ptm);
  for (int t = 0; t < 5; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < c.pixels(); ++p) CHECK(std::abs(c.at(ptm_plane(t, ch), p)) < 1e-6);
  for (int ch = 0; ch < 3; ++ch)
    CHECK(std::abs(c.at(ptm_plane(5, ch), 0) - 140.0 / 255.0) <= 0.5 / 255.0);
}

TEST_CASE("too few or degenerate lights are ill-conditioned") {
  auto expect_ill = [](const std::vector<LightingVector>& lights) {
    try {
      fit_ptm_coefficients(lights, model_images(lights, 2, 2, {0, 0, 0, 0, 0, 1}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IllConditioned);
    }
  };
  expect_ill(ring_lights(5));
  std::vector<LightingVector> line;
  for (int i = 0; i < 10; ++i) line.push_back(LightingVector::from_uv(0.05 * i, 0.0));
  expect_ill(line);
  CHECK(ptm_condition(ring_lights(12)) < 1e7);
}

TEST_CASE("flat Lambertian fit peaks at the true normal") {
  SceneSpec spec;
  spec.width = spec.height = 16;
  const CaptureSet set = plan_captures(12, spec);
  REQUIRE(set.captures.size() >= 9);
  REQUIRE(set.captures.size() <= 15);
  const NormalMap m = normal_map(fit_ptm(set));
  REQUIRE(m.valid_count() == m.normals.size());
  for (const Vec3& n : m.normals) CHECK(std::atan2(n.cross({0, 0, 1}).norm(), n.z) < 0.05);
}

TEST_CASE("relight at the origin is the constant plane") {
  const CaptureSet set = plan_captures(30, SceneSpec::default_scene());
  const PtmImage ptm = fit_ptm(set);
  const PtmCoefficients c = dequantize_ptm(ptm);
  const ImageRgb8 img = relight(ptm, 0.0, 0.0);
  for (std::size_t p = 0; p < c.pixels(); ++p)
    for (int ch = 0; ch < 3; ++ch)
      CHECK(img.data[p * 3 + ch] == quantize_unit(c.at(ptm_plane(5, ch), p)));
}

TEST_CASE("relight reproduces Lambertian captures under moderate lighting") {
  ScanRegion r = axis_cap();
  r.h_min = r.v_min = -0.6;
  r.h_max = r.v_max = 0.6;
  const LightingPlan plan = sppa_plan_near_count(r, 60, {3.0, -1.0, 1.0});
  const CaptureSet set = run_capture(plan, Scene::build(SceneSpec::default_scene()), CameraModel{}, 0.0, 1);
  const PtmImage ptm = fit_ptm(set);
  for (const auto& cap : set.captures)
    CHECK(mean_abs_error(relight(ptm, cap.recorded.u, cap.recorded.v), cap.image) <= 3.0);
}

TEST_CASE("round-trip error grows with light obliquity") {
  // The cosine law leaves the quadratic model class toward grazing light.
  double prev = 0.0;
  for (double half : {0.4, 0.6, 0.8, 1.0}) {
    ScanRegion r = axis_cap();
    r.h_min = r.v_min = -half;
    r.h_max = r.v_max = half;
    const LightingPlan plan = sppa_plan_near_count(r, 40, {3.0, -1.0, 1.0});
    const CaptureSet set = run_capture(plan, Scene::build(SceneSpec::default_scene()), CameraModel{}, 0.0, 1);
    const PtmImage ptm = fit_ptm(set);
    double worst = 0.0;
    for (const auto& cap : set.captures)
      worst = std::max(worst, mean_abs_error(relight(ptm, cap.recorded.u, cap.recorded.v), cap.image));
    CHECK(worst > prev);
    prev = worst;
  }
}

TEST_CASE("relight is linear in the coefficients") {
  const PtmCoefficients a = uniform_coefficients(3, 2, {-0.2, 0.1, 0.05, 0.3, -0.1, 0.2});
  const PtmCoefficients b = uniform_coefficients(3, 2, {0.1, -0.3, 0.2, -0.1, 0.15, 0.25});
  PtmCoefficients sum = a;
  for (std::size_t i = 0; i < sum.planes.size(); ++i) sum.planes[i] += b.planes[i];
  for (auto [lu, lv] : {std::pair{0.0, 0.0}, std::pair{0.3, -0.4}, std::pair{-0.7, 0.1}}) {
    const ImageRgbF fa = relight_linear(a, lu, lv), fb = relight_linear(b, lu, lv), fs = relight_linear(sum, lu, lv);
    for (std::size_t i = 0; i < fs.data.size(); ++i) CHECK(fs.data[i] == doctest::Approx(fa.data[i] + fb.data[i]).epsilon(1e-6));
  }
}

TEST_CASE("out-of-disc relight is rejected") {
  const PtmCoefficients c = uniform_coefficients(2, 2, {0, 0, 0, 0, 0, 0.5});
  CHECK_THROWS_AS(relight(c, 0.8, 0.8), Error);
  CHECK_NOTHROW(relight(c, 0.6, 0.8));
}

TEST_CASE("fit minimises the residual") {
  const CaptureSet set = plan_captures(30, SceneSpec::default_scene());
  std::vector<ImageRgbF> imgs;
  for (const auto& c : set.captures) imgs.push_back(to_float(c.image));
  const auto lights = set.recorded_lights();
  const PtmCoefficients best = fit_ptm_coefficients(lights, imgs);
  const double r0 = ptm_residual(best, lights, imgs);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (int i = 0; i < 20; ++i) {
    PtmCoefficients p = best;
    for (auto& v : p.planes) v += n(rng);
    CHECK(ptm_residual(p, lights, imgs) >= r0);
  }
}

TEST_CASE("constructed stationary point") {
  const PtmCoefficients c = uniform_coefficients(1, 1, {-1.0, -1.0, 0.0, 0.4, -0.2, 0.95});
  const NormalMap m = normal_map(c);
  REQUIRE(m.valid[0] == 1);
  CHECK(m.normals[0].x == doctest::Approx(0.2));
  CHECK(m.normals[0].y == doctest::Approx(-0.1));
  CHECK(m.normals[0].z == doctest::Approx(std::sqrt(1.0 - 0.05)));
  CHECK(m.normals[0].z == doctest::Approx(0.97468).epsilon(1e-5));
}

TEST_CASE("symmetric paraboloid gives the frontal normal") {
  const NormalMap m = normal_map(uniform_coefficients(1, 1, {-0.5, -0.5, 0.0, 0.0, 0.0, 0.8}));
  REQUIRE(m.valid[0] == 1);
  CHECK(std::abs(m.normals[0].x) < 1e-15);
  CHECK(std::abs(m.normals[0].y) < 1e-15);
  CHECK(m.normals[0].z == 1.0);
}

TEST_CASE("invalid stationary points are data, not errors") {
  // Minimum instead of maximum.
  CHECK(normal_map(uniform_coefficients(1, 1, {1.0, 1.0, 0.0, 0.0, 0.0, 0.1})).valid[0] == 0);
  // Saddle.
  CHECK(normal_map(uniform_coefficients(1, 1, {-1.0, 1.0, 0.0, 0.1, 0.0, 0.1})).valid[0] == 0);
  // Degenerate determinant.
  CHECK(normal_map(uniform_coefficients(1, 1, {0.0, 0.0, 0.0, 0.1, 0.1, 0.5})).valid[0] == 0);
  // Peak outside the unit disc.
  const NormalMap far = normal_map(uniform_coefficients(1, 1, {-1.0, -1.0, 0.0, 3.0, 0.0, 0.0}));
  CHECK(far.valid[0] == 0);
  CHECK(std::isnan(far.normals[0].x));
}

TEST_CASE("identical maps compare to zero") {
  const NormalMap a = uniform_map(4, 4, Vec3{0.1, 0.2, 1.0}.normalized());
  const NormalComparison c = compare_normals(a, a);
  CHECK(c.delta == 0.0);
  CHECK(c.compared == 16);
}

TEST_CASE("tilting every normal by 0.1 rad gives delta 0.1") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  NormalMap a = uniform_map(8, 8, {0, 0, 1}), b = a;
  for (std::size_t i = 0; i < a.normals.size(); ++i) {
    Vec3 n{0.3 * g(rng), 0.3 * g(rng), 1.0};
    n = n.normalized();
    // Rotate about an axis orthogonal to n (Rodrigues with k . n = 0).
    Vec3 k = n.cross({1, 0, 0});
    k = k.normalized();
    const double t = 0.1;
    a.normals[i] = n;
    b.normals[i] = n * std::cos(t) + k.cross(n) * std::sin(t);
  }
  const double ab = compare_normals(a, b).delta;
  CHECK(ab == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(compare_normals(b, a).delta == ab);
}

TEST_CASE("comparison skips invalid pixels and needs overlap") {
  NormalMap a = uniform_map(2, 1, {0, 0, 1}), b = uniform_map(2, 1, {1, 0, 0});
  a.valid[0] = 0;
  b.valid[1] = 0;
  try {
    compare_normals(a, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UndefinedMean);
  }
  b.valid[1] = 1;
  const NormalComparison c = compare_normals(a, b);
  CHECK(c.compared == 1);
  CHECK(c.delta == doctest::Approx(kPi / 2.0));
  CHECK(std::isnan(c.angles[0]));
  CHECK_THROWS_AS(compare_normals(a, uniform_map(3, 1, {0, 0, 1})), Error);
}

TEST_CASE("heatmap carries its scale legend") {
  NormalMap a = uniform_map(3, 1, {0, 0, 1}), b = a;
  b.normals[2] = Vec3{0.0, std::sin(0.2), std::cos(0.2)};
  b.valid[1] = 0;
  PngText legend;
  const ImageRgb8 img = heatmap(compare_normals(a, b), 0.2, &legend);
  CHECK(legend.count("rti:scale_max_rad") == 1);
  CHECK(img.at(0, 0, 0) == 0);
  CHECK(img.at(2, 0, 0) == 255);
  CHECK(img.at(2, 0, 1) == 255);
  CHECK(img.at(1, 0, 2) == 128);
}

TEST_CASE("rtiptm round-trips bit-exactly") {
  const PtmImage ptm = fit_ptm(plan_captures(20, SceneSpec::default_scene()));
  const auto bytes = encode_rtiptm(ptm);
  REQUIRE(bytes.size() > 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "RTIPTM1\n");
  const PtmImage back = decode_rtiptm(bytes);
  CHECK(back.width == ptm.width);
  CHECK(back.height == ptm.height);
  for (int p = 0; p < kPtmPlanes; ++p) {
    CHECK(back.planes[p].raw == ptm.planes[p].raw);
    CHECK(back.planes[p].scale == ptm.planes[p].scale);
    CHECK(back.planes[p].bias == ptm.planes[p].bias);
  }
  CHECK(encode_rtiptm(back) == bytes);
  for (auto [lu, lv] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.2}, std::pair{-0.3, -0.6}})
    CHECK(relight(back, lu, lv).data == relight(ptm, lu, lv).data);

  const fs::path path = scratch("roundtrip.rtiptm");
  write_rtiptm(path.string(), ptm);
  CHECK(encode_rtiptm(read_rtiptm(path.string())) == bytes);
}

TEST_CASE("malformed containers are parse errors") {
  const PtmImage ptm = fit_ptm(plan_captures(20, SceneSpec::default_scene()));
  auto bytes = encode_rtiptm(ptm);
  auto expect_parse = [](const std::vector<std::uint8_t>& b) {
    try {
      decode_rtiptm(b);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
    }
  };
  auto bad_magic = bytes;
  bad_magic[3] = 'X';
  expect_parse(bad_magic);
  expect_parse({bytes.begin(), bytes.end() - 1});
  expect_parse({bytes.begin(), bytes.begin() + 12});
}

TEST_CASE("coefficient quantization stays within one step when relit") {
  const CaptureSet set = plan_captures(60, SceneSpec::default_scene());
  std::vector<ImageRgbF> imgs;
  for (const auto& c : set.captures) imgs.push_back(to_float(c.image));
  const PtmCoefficients exact = fit_ptm_coefficients(set.recorded_lights(), imgs);
  const PtmCoefficients quant = dequantize_ptm(quantize_ptm(exact));
  for (auto [lu, lv] : {std::pair{0.0, 0.0}, std::pair{0.4, 0.3}, std::pair{-0.6, 0.2}}) {
    const ImageRgb8 a = relight(exact, lu, lv), b = relight(quant, lu, lv);
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(std::abs(int(a.data[i]) - int(b.data[i])) <= 1);
  }
}

TEST_CASE("dense lighting recovers the hemisphere normals") {
  const SceneSpec spec = SceneSpec::default_scene();
  const Scene scene = Scene::build(spec);
  const NormalMap truth = scene_normals(scene);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {6u, 15u, 30u, 60u}) {
    const LightingPlan plan = fibonacci_positions(axis_cap(), n, {3.0, -1.0, 1.0});
    const CaptureSet set = run_capture(plan, scene, CameraModel{}, 0.0, 1);
    const double d = compare_normals(normal_map(fit_ptm(set)), truth).delta;
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("normal maps round-trip through PNG and sidecar") {
  const NormalMap m = normal_map(fit_ptm(plan_captures(30, SceneSpec::default_scene())));
  REQUIRE(m.valid_count() > 0);
  REQUIRE(m.valid_count() < m.normals.size());
  const fs::path png = scratch("normals.png"), side = scratch("normals.nrm");
  write_normal_map(png.string(), side.string(), m);

  const NormalMap s = read_normal_sidecar(side.string());
  CHECK(s.valid == m.valid);
  for (std::size_t i = 0; i < m.normals.size(); ++i)
    if (m.valid[i]) CHECK(std::abs(s.normals[i].x - m.normals[i].x) < 1e-7);

  const NormalMap p = read_normal_png(png.string());
  CHECK(p.valid == m.valid);
  CHECK(compare_normals(m, p).max_angle < 0.01);
}

TEST_CASE("parallel and serial fits agree bit-exactly") {
  const CaptureSet set = plan_captures(30, SceneSpec::default_scene());
  ::setenv("RTI_STUDIO_THREADS", "1", 1);
  const auto serial = encode_rtiptm(fit_ptm(set));
  ::setenv("RTI_STUDIO_THREADS", "4", 1);
  const auto parallel = encode_rtiptm(fit_ptm(set));
  ::unsetenv("RTI_STUDIO_THREADS");
  CHECK(serial == parallel);
}

}
