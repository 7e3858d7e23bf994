#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rti/common.hpp"
#include "rti/lighting_plan.hpp"

using namespace rti;

namespace {

ScanRegion worked_region() {
  ScanRegion r;
  r.v_min = 0.0;
  r.v_max = kPi / 3.0;
  r.h_min = -kPi / 2.0;
  r.h_max = kPi / 2.0;
  r.distance = 2.0;
  return r;
}

// Rounding oracle kept independent of the library's helper.
double round_half_away(double x) { return x < 0.0 ? -std::floor(-x + 0.5) : std::floor(x + 0.5); }

ScanRegion random_region(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScanRegion r;
  const double v_span = 0.2 + 1.0 * u(rng);
  r.v_min = -1.2 + (1.4 - v_span) * u(rng) * 0.5;
  r.v_max = r.v_min + v_span;
  const double h_span = 0.5 + 5.5 * u(rng);
  r.h_min = -h_span / 2.0;
  r.h_max = h_span / 2.0;
  r.distance = 1.0 + 4.0 * u(rng);
  r.ooi = {u(rng) * 4.0, u(rng) * 4.0 - 2.0, u(rng)};
  r.cam_yaw = (u(rng) - 0.5) * 0.8;
  r.cam_pitch = (u(rng) - 0.5) * 0.4;
  return r;
}

}  // namespace

TEST_SUITE("lighting_plan") {

TEST_CASE("worked region grid arithmetic") {
  const ScanRegion r = worked_region();
  const auto lv = sppa_vertical_samples(r, 3);
  REQUIRE(lv.size() == 3);
  CHECK(lv[0] == 0.0);
  CHECK(lv[1] == doctest::Approx(kPi / 6.0).epsilon(1e-15));
  CHECK(lv[2] == kPi / 3.0);

  const double s_d = sppa_spline_spacing(r, 3);
  CHECK(std::abs(s_d - 2.0 * kPi / 9.0) <= 4.0 * std::numeric_limits<double>::epsilon());

  const std::size_t expected[] = {10, 9, 6};
  for (int i = 0; i < 3; ++i) {
    const double oracle = 1.0 + round_half_away(9.0 * std::cos(lv[i]));
    CHECK(static_cast<double>(sppa_row_size(r, lv[i], s_d)) == oracle);
    CHECK(sppa_row_size(r, lv[i], s_d) == expected[i]);
  }

  const LightingPlan plan = sppa_positions(r, 3, {3.0, -3.0, 0.0});
  REQUIRE(plan.rows.size() == 3);
  CHECK(plan.rows[0].lambda_h.size() == 10);
  CHECK(plan.rows[1].lambda_h.size() == 9);
  CHECK(plan.rows[2].lambda_h.size() == 6);
  CHECK(plan.size() == 25);
}

TEST_CASE("half-to-even rounding changes the 4.5 row") {
  const ScanRegion r = worked_region();
  const double s_d = sppa_spline_spacing(r, 3);
  CHECK(sppa_row_size(r, kPi / 3.0, s_d, Rounding::HalfAwayFromZero) == 6);
  CHECK(sppa_row_size(r, kPi / 3.0, s_d, Rounding::HalfToEven) == 5);
}

TEST_CASE("single-sample row sits at the window midpoint") {
  ScanRegion r = worked_region();
  r.h_min = -0.2;
  r.h_max = 0.6;
  const auto samples = sppa_row_samples(r, 1);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0] == doctest::Approx(0.2));
}

TEST_CASE("zero angles put the spline point on the camera axis") {
  ScanRegion r = worked_region();
  r.ooi = {4.0, 1.0, 0.5};
  for (SppaMode mode : {SppaMode::Spherical, SppaMode::Faithful}) {
    const Vec3 p = cap_point(r, 0.0, 0.0, mode);
    CHECK((p - Vec3{2.0, 1.0, 0.5}).norm() < 1e-15);
  }
}

TEST_CASE("cap_angles inverts cap_point") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const ScanRegion r = random_region(rng);
    std::uniform_real_distribution<double> h(r.h_min, r.h_max), v(r.v_min, r.v_max);
    const double lh = h(rng), lv = v(rng);
    const LightAngles a = cap_angles(r, cap_point(r, lh, lv));
    CHECK(a.h == doctest::Approx(lh).epsilon(1e-9));
    CHECK(a.v == doctest::Approx(lv).epsilon(1e-9));
  }
}

TEST_CASE("SPPA grid invariants on random regions") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const ScanRegion r = random_region(rng);
    const std::size_t v_s = 2 + rng() % 7;
    for (SppaMode mode : {SppaMode::Spherical, SppaMode::Faithful}) {
      const LightingPlan plan = sppa_positions(r, v_s, {0.0, 0.0, 3.0}, mode);
      REQUIRE(plan.rows.size() == v_s);
      CHECK(plan.rows.front().lambda_v == r.v_min);
      CHECK(plan.rows.back().lambda_v == r.v_max);
      std::size_t idx = 0;
      for (const auto& row : plan.rows) {
        const auto& h = row.lambda_h;
        if (h.size() >= 2) {
          CHECK(h.front() == r.h_min);
          CHECK(h.back() == r.h_max);
          const double step = h[1] - h[0];
          for (std::size_t k = 1; k < h.size(); ++k) CHECK(std::abs((h[k] - h[k - 1]) - step) < 1e-12);
        }
        for (std::size_t k = 0; k < h.size(); ++k, ++idx) {
          const Vec3& p = plan.positions[idx];
          if (mode == SppaMode::Spherical) {
            CHECK(std::abs(distance(p, r.ooi) - r.distance) < 1e-9);
            const LightAngles got = cap_angles(r, p);
            INFO("h " << got.h << " in [" << r.h_min << ", " << r.h_max << "], v " << got.v << " in [" << r.v_min << ", " << r.v_max << "] pitch " << r.cam_pitch);
            CHECK(in_window(r, got));
          } else {
            const Vec3 d = p - r.ooi;
            const double horizontal = std::hypot(d.x, d.y);
            CHECK(std::abs(horizontal - r.distance * std::cos(row.lambda_v + r.cam_pitch)) < 1e-9);
          }
        }
      }
      CHECK(idx == plan.size());
    }
  }
}

TEST_CASE("SPPA needs two vertical samples") {
  CHECK_THROWS_AS(sppa_positions(worked_region(), 1, {}), Error);
}

TEST_CASE("fibonacci with n = 0 keeps only P_i") {
  const LightingPlan plan = fibonacci_positions(worked_region(), 0, {1.0, 2.0, 3.0});
  CHECK(plan.size() == 0);
  CHECK(plan.initial == Vec3{1.0, 2.0, 3.0});
}

TEST_CASE("fibonacci points lie on the sphere inside the window") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const ScanRegion r = random_region(rng);
    const std::size_t n = 1 + rng() % 150;
    const LightingPlan plan = fibonacci_positions(r, n, {0.0, 0.0, 5.0});
    REQUIRE(plan.size() == n);
    for (const Vec3& p : plan.positions) {
      CHECK(std::abs(distance(p, r.ooi) - r.distance) < 1e-9);
      CHECK(in_window(r, cap_angles(r, p)));
    }
  }
}

TEST_CASE("fibonacci hemisphere spacing is near uniform") {
  ScanRegion r;
  r.h_min = -kPi;
  r.h_max = kPi;
  r.v_min = -kPi / 2.0;
  r.v_max = 0.0;
  r.distance = 1.0;
  const std::size_t n = 200;
  const LightingPlan plan = fibonacci_positions(r, n, {5.0, 0.0, 0.0});
  REQUIRE(plan.size() == n);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const Vec3 pa = (plan.positions[a] - r.ooi).normalized();
      const Vec3 pb = (plan.positions[b] - r.ooi).normalized();
      min_gap = std::min(min_gap, std::atan2(pa.cross(pb).norm(), pa.dot(pb)));
    }
  const double ideal = std::sqrt(4.0 * kPi / static_cast<double>(n));
  CHECK(min_gap >= ideal / 2.0);
  CHECK(min_gap <= ideal * 2.0);
}

TEST_CASE("fibonacci positions are pairwise distinct") {
  const LightingPlan plan = fibonacci_positions(worked_region(), 120, {});
  for (std::size_t a = 0; a < plan.size(); ++a)
    for (std::size_t b = a + 1; b < plan.size(); ++b) CHECK(distance(plan.positions[a], plan.positions[b]) > 1e-6);
}

TEST_CASE("empty window is an invalid region") {
  ScanRegion r = worked_region();
  r.h_max = r.h_min;
  try {
    fibonacci_positions(r, 10, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRegion);
  }
}

TEST_CASE("plan near a target count") {
  ScanRegion r = worked_region();
  const LightingPlan plan = sppa_plan_near_count(r, 60, {});
  CHECK(plan.size() >= 40);
  CHECK(plan.size() <= 80);
}

}
