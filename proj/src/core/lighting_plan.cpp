#include "rti/lighting_plan.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>
#include <map>

#include "rti/common.hpp"

namespace rti {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double round_count(double x, Rounding rounding) {
  // Ratios that are ties in exact arithmetic (9 cos(pi/3) = 4.5) land an ulp
  // off; snap them so the rounding rule decides.
  const double fl = std::floor(x);
  if (std::abs(x - fl - 0.5) < 1e-9 * std::max(1.0, std::abs(x))) x = fl + 0.5;
  if (rounding == Rounding::HalfAwayFromZero) return std::round(x);
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x);
  std::fesetround(saved);
  return r;
}

// Fraction of the unit sphere covered by the angular window.
double window_fraction(const ScanRegion& region) {
  const double lo = std::clamp(region.v_min + region.cam_pitch, -kPi / 2.0, kPi / 2.0);
  const double hi = std::clamp(region.v_max + region.cam_pitch, -kPi / 2.0, kPi / 2.0);
  const double area = (region.h_max - region.h_min) * (std::sin(hi) - std::sin(lo));
  return area / (4.0 * kPi);
}

Vec3 lattice_direction(std::size_t i, std::size_t total) {
  static const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(total);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double theta = golden_angle * static_cast<double>(i);
  return {r * std::cos(theta), r * std::sin(theta), z};
}

std::vector<std::size_t> lattice_survivors(const ScanRegion& region, std::size_t total) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < total; ++i) {
    const Vec3 p = region.ooi + lattice_direction(i, total) * region.distance;
    if (in_window(region, cap_angles(region, p), 0.0)) keep.push_back(i);
  }
  return keep;
}

}  // namespace

void ScanRegion::validate() const {
  if (!(h_min < h_max)) fail(ErrorCode::InvalidRegion, "empty horizontal window (h_min >= h_max)");
  if (!(v_min < v_max)) fail(ErrorCode::InvalidRegion, "empty vertical window (v_min >= v_max)");
  if (h_max - h_min > kTwoPi + 1e-12)
    fail(ErrorCode::InvalidRegion, "horizontal window wider than 2 pi");
  if (!(v_max - v_min < kPi)) fail(ErrorCode::InvalidRegion, "vertical window must be narrower than pi");
  if (!(distance > 0.0)) fail(ErrorCode::InvalidRegion, "lighting distance must be positive");
}

std::size_t LightingPlan::row_offset(std::size_t r) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < r && i < rows.size(); ++i) off += rows[i].lambda_h.size();
  return off;
}

std::string to_string(PlanKind kind) { return kind == PlanKind::Sppa ? "sppa" : "fibonacci"; }
std::string to_string(SppaMode mode) { return mode == SppaMode::Spherical ? "spherical" : "faithful"; }

Vec3 cap_point(const ScanRegion& region, double lambda_h, double lambda_v, SppaMode mode) {
  const double v = lambda_v + region.cam_pitch;
  const double h = lambda_h + region.cam_yaw;
  const double d = region.distance;
  const double dz = mode == SppaMode::Spherical ? d * std::sin(v) : d * std::tan(v);
  return {region.ooi.x - d * std::cos(v) * std::cos(h),
          region.ooi.y - d * std::cos(v) * std::sin(h),
          region.ooi.z - dz};
}

LightAngles cap_angles(const ScanRegion& region, const Vec3& position) {
  const Vec3 q = (region.ooi - position).normalized();
  LightAngles a;
  a.v = std::asin(std::clamp(q.z, -1.0, 1.0)) - region.cam_pitch;
  const double h = std::atan2(q.y, q.x) - region.cam_yaw;
  double off = std::fmod(std::fmod(h - region.h_min, kTwoPi) + kTwoPi, kTwoPi);
  if (off > kTwoPi - 1e-9) off -= kTwoPi;  // rounding just below h_min
  a.h = region.h_min + off;
  return a;
}

bool in_window(const ScanRegion& region, const LightAngles& a, double tol) {
  return a.h >= region.h_min - tol && a.h <= region.h_max + tol &&
         a.v >= region.v_min - tol && a.v <= region.v_max + tol;
}

LightingPlan fibonacci_positions(const ScanRegion& region, std::size_t n, const Vec3& initial) {
  region.validate();
  const double frac = window_fraction(region);
  if (!(frac > 0.0)) fail(ErrorCode::InvalidRegion, "angular window covers no light directions");

  LightingPlan plan;
  plan.kind = PlanKind::Fibonacci;
  plan.region = region;
  plan.initial = initial;
  plan.rows.push_back({std::numeric_limits<double>::quiet_NaN(), {}});
  if (n == 0) return plan;

  // Grow the full-sphere lattice until exactly n points land in the window.
  // The survivor count tracks frac * total closely, so a secant step gets
  // close and a unit scan finishes.
  std::map<std::size_t, std::vector<std::size_t>> seen;
  auto survivors = [&](std::size_t total) -> const std::vector<std::size_t>& {
    auto it = seen.find(total);
    if (it == seen.end()) it = seen.emplace(total, lattice_survivors(region, total)).first;
    return it->second;
  };
  std::size_t total = std::max<std::size_t>(n, static_cast<std::size_t>(std::llround(n / frac)));
  std::optional<std::size_t> hit;
  for (int iter = 0; iter < 40 && !hit; ++iter) {
    const auto count = static_cast<double>(survivors(total).size());
    if (count == static_cast<double>(n)) { hit = total; break; }
    const double step = (static_cast<double>(n) - count) / frac;
    if (std::abs(step) < 8.0) break;
    const double next = std::max(static_cast<double>(n), static_cast<double>(total) + step);
    total = static_cast<std::size_t>(std::llround(next));
  }
  if (!hit && survivors(total).size() == n) hit = total;
  for (std::size_t k = 1; !hit && k <= 256; ++k) {
    if (survivors(total + k).size() == n) hit = total + k;
    else if (total >= n + k && survivors(total - k).size() == n) hit = total - k;
  }
  std::vector<std::size_t> keep;
  std::size_t used_total = 0;
  if (hit) {
    used_total = *hit;
    keep = survivors(*hit);
  } else {
    // No lattice size lands exactly on n: take the smallest examined size
    // with a surplus and drop the highest lattice indices.
    for (const auto& [t, s] : seen) {
      if (s.size() >= n) { used_total = t; keep = s; break; }
    }
    if (keep.size() < n) {
      for (std::size_t t = total;; t += std::max<std::size_t>(1, total / 8)) {
        if (survivors(t).size() >= n) { used_total = t; keep = survivors(t); break; }
      }
    }
    keep.resize(n);
  }

  for (std::size_t idx : keep) {
    const Vec3 p = region.ooi + lattice_direction(idx, used_total) * region.distance;
    const LightAngles a = cap_angles(region, p);
    plan.positions.push_back(p);
    plan.angles.push_back(a);
    plan.rows.front().lambda_h.push_back(a.h);
  }
  return plan;
}

std::vector<double> sppa_vertical_samples(const ScanRegion& region, std::size_t v_s) {
  require(v_s >= 2, "SPPA needs at least two vertical samples (v_s >= 2)");
  std::vector<double> out(v_s);
  const double step = (region.v_max - region.v_min) / static_cast<double>(v_s - 1);
  for (std::size_t i = 0; i < v_s; ++i) out[i] = region.v_min + step * static_cast<double>(i);
  out.back() = region.v_max;
  return out;
}

double sppa_spline_spacing(const ScanRegion& region, std::size_t v_s) {
  require(v_s >= 2, "SPPA needs at least two vertical samples (v_s >= 2)");
  return region.distance * (region.v_max - region.v_min) / static_cast<double>(v_s);
}

std::size_t sppa_row_size(const ScanRegion& region, double lambda_v, double spacing,
                          Rounding rounding) {
  const double arc = region.distance * std::cos(lambda_v) * (region.h_max - region.h_min);
  const double n = 1.0 + round_count(arc / spacing, rounding);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::vector<double> sppa_row_samples(const ScanRegion& region, std::size_t n_s) {
  const double span = region.h_max - region.h_min;
  if (n_s <= 1) return {region.h_min + span / 2.0};
  std::vector<double> out(n_s);
  for (std::size_t k = 0; k < n_s; ++k)
    out[k] = region.h_min + static_cast<double>(k) * span / static_cast<double>(n_s - 1);
  out.back() = region.h_max;
  return out;
}

LightingPlan sppa_positions(const ScanRegion& region, std::size_t v_s, const Vec3& initial,
                            SppaMode mode, Rounding rounding) {
  region.validate();
  require(v_s >= 2, "SPPA needs at least two vertical samples (v_s >= 2)");
  LightingPlan plan;
  plan.kind = PlanKind::Sppa;
  plan.mode = mode;
  plan.region = region;
  plan.initial = initial;
  const double spacing = sppa_spline_spacing(region, v_s);
  for (double lv : sppa_vertical_samples(region, v_s)) {
    PlanRow row{lv, sppa_row_samples(region, sppa_row_size(region, lv, spacing, rounding))};
    for (double lh : row.lambda_h) {
      plan.positions.push_back(cap_point(region, lh, lv, mode));
      plan.angles.push_back({lh, lv});
    }
    plan.rows.push_back(std::move(row));
  }
  return plan;
}

LightingPlan sppa_plan_near_count(const ScanRegion& region, std::size_t target,
                                  const Vec3& initial, SppaMode mode) {
  std::optional<LightingPlan> best;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t v_s = 2; v_s <= 64; ++v_s) {
    LightingPlan p = sppa_positions(region, v_s, initial, mode);
    const std::size_t gap = p.size() > target ? p.size() - target : target - p.size();
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(p);
    }
    if (best_gap == 0) break;
  }
  return std::move(*best);
}

}  // namespace rti
