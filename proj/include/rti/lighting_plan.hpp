#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rti/geometry.hpp"

namespace rti {

// Angular window of light directions around the object of interest, the
// lighting distance, and the camera orientation the angles are relative to.
struct ScanRegion {
  double h_min = -kPi / 2.0;
  double h_max = kPi / 2.0;
  double v_min = -kPi / 3.0;
  double v_max = 0.0;
  double distance = 2.0;  // d_l
  Vec3 ooi;
  double cam_yaw = 0.0;
  double cam_pitch = 0.0;

  void validate() const;
};

enum class PlanKind { Fibonacci, Sppa };

// Spherical keeps every grid point at distance d_l; Faithful reproduces the
// printed z = z_OoI - d_l tan(lambda_v + pitch).
enum class SppaMode { Spherical, Faithful };

enum class Rounding { HalfAwayFromZero, HalfToEven };

struct LightAngles {
  double h = 0.0;
  double v = 0.0;
};

struct PlanRow {
  double lambda_v = 0.0;           // NaN for the synthetic Fibonacci row
  std::vector<double> lambda_h;
};

struct LightingPlan {
  PlanKind kind = PlanKind::Sppa;
  SppaMode mode = SppaMode::Spherical;
  ScanRegion region;
  std::vector<PlanRow> rows;
  std::vector<Vec3> positions;      // row-major, matching `rows`
  std::vector<LightAngles> angles;  // one per position
  Vec3 initial;

  std::size_t size() const { return positions.size(); }
  // Index into `positions` of the first sample of row r (0-based).
  std::size_t row_offset(std::size_t r) const;
};

std::string to_string(PlanKind kind);
std::string to_string(SppaMode mode);

// Light position for window angles (h, v) on the cap about the OoI.
Vec3 cap_point(const ScanRegion& region, double lambda_h, double lambda_v,
               SppaMode mode = SppaMode::Spherical);

// Inverse of cap_point in spherical mode: the window angles of a direction
// from the OoI. lambda_h is unwrapped into [h_min, h_min + 2 pi), up to
// rounding at h_min.
LightAngles cap_angles(const ScanRegion& region, const Vec3& position);

bool in_window(const ScanRegion& region, const LightAngles& a, double tol = 1e-9);

LightingPlan fibonacci_positions(const ScanRegion& region, std::size_t n, const Vec3& initial);

// Building blocks of the SPPA grid, exposed for tests and tooling.
std::vector<double> sppa_vertical_samples(const ScanRegion& region, std::size_t v_s);
double sppa_spline_spacing(const ScanRegion& region, std::size_t v_s);
std::size_t sppa_row_size(const ScanRegion& region, double lambda_v, double spacing,
                          Rounding rounding = Rounding::HalfAwayFromZero);
std::vector<double> sppa_row_samples(const ScanRegion& region, std::size_t n_s);

LightingPlan sppa_positions(const ScanRegion& region, std::size_t v_s, const Vec3& initial,
                            SppaMode mode = SppaMode::Spherical,
                            Rounding rounding = Rounding::HalfAwayFromZero);

// SPPA plan whose grid size is closest to `target` over v_s in [2, 64]
// (ties prefer the smaller v_s).
LightingPlan sppa_plan_near_count(const ScanRegion& region, std::size_t target,
                                  const Vec3& initial, SppaMode mode = SppaMode::Spherical);

}  // namespace rti
