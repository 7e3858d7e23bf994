// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rti/capture.hpp"
#include "rti/common.hpp"
#include "rti/config.hpp"
#include "rti/experiments.hpp"
#include "rti/lighting_plan.hpp"
#include "rti/mission.hpp"
#include "rti/mpc.hpp"
#include "rti/pipeline.hpp"
#include "rti/ptm.hpp"
#include "rti/sequencing.hpp"

using namespace rti;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome sequencing_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  const int instances = 240;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 6);  // 3..8
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    const double exact = brute_force_tour(pts).length_m;
    const double heur = etsp_tour(pts, {static_cast<std::uint64_t>(i)}).length_m;
    worst = std::max(worst, heur / exact);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1.05 && secs < 10.0,
          fmt("%d instances, worst etsp/exact %.6f, %.2f s", instances, worst, secs)};
}

Outcome sppa_arithmetic() {
  ScanRegion r;
  r.v_min = 0.0;
  r.v_max = kPi / 3.0;
  r.h_min = -kPi / 2.0;
  r.h_max = kPi / 2.0;
  r.distance = 2.0;
  const LightingPlan plan = sppa_positions(r, 3, {3.0, -3.0, 0.0});
  std::vector<std::size_t> rows;
  for (const auto& row : plan.rows) rows.push_back(row.lambda_h.size());
  const double s_d = sppa_spline_spacing(r, 3);
  const double err = std::abs(s_d - 2.0 * kPi / 9.0);
  const bool ok = rows == std::vector<std::size_t>{10, 9, 6} &&
                  err <= 4.0 * std::numeric_limits<double>::epsilon();
  std::string got;
  for (auto n : rows) got += std::to_string(n) + " ";
  return {ok, fmt("rows %s| s_d - 2pi/9 = %.3g", got.c_str(), s_d - 2.0 * kPi / 9.0)};
}

Outcome sppa_validity() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0, with_pair = 0;
  const int grids = 1000;
  for (int i = 0; i < grids; ++i) {
    ScanRegion r;
    r.ooi = {3.0, 0.0, 0.0};
    const double v_span = 0.2 + 1.2 * u(rng);
    r.v_min = -1.3 + (1.5 - v_span) * u(rng);
    r.v_max = r.v_min + v_span;
    const double h_span = 0.4 + 5.8 * u(rng);
    r.h_min = -h_span / 2.0;
    r.h_max = h_span / 2.0;
    r.distance = 0.8 + 3.0 * u(rng);
    const Vec3 initial = r.ooi + Vec3{4.0 * u(rng) - 2.0, 8.0 * u(rng) - 4.0, 4.0 * u(rng) - 2.0};
    const std::size_t v_s = 2 + rng() % 7;
    const LightingPlan plan = sppa_positions(r, v_s, initial);
    const Sequence seq = sppa_sequence(plan);

    // Every position exactly once, P_i at both ends.
    bool ok = seq.positions.size() == plan.size() + 2 && seq.positions.front() == initial &&
              seq.positions.back() == initial;
    std::vector<int> seen(plan.size(), 0);
    for (std::size_t k = 1; ok && k + 1 < seq.positions.size(); ++k) {
      const auto it = std::find(plan.positions.begin(), plan.positions.end(), seq.positions[k]);
      if (it == plan.positions.end()) ok = false;
      else ++seen[static_cast<std::size_t>(it - plan.positions.begin())];
    }
    ok = ok && std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });

    // Boundary pair: enumerate every first/last column pair of adjacent rows.
    std::vector<std::size_t> offset;
    std::size_t off = 0;
    for (const auto& row : plan.rows) {
      offset.push_back(off);
      off += row.lambda_h.size();
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < plan.rows.size(); ++k) {
      const std::size_t a = plan.rows[k].lambda_h.size(), b = plan.rows[k + 1].lambda_h.size();
      if (a < 2 || b < 2) continue;
      for (bool first : {true, false}) {
        const Vec3& p = plan.positions[offset[k] + (first ? 0 : a - 1)];
        const Vec3& q = plan.positions[offset[k + 1] + (first ? 0 : b - 1)];
        best = std::min(best, distance(p, initial) + distance(q, initial));
      }
    }
    if (std::isfinite(best) && ok) {
      ++with_pair;
      const Vec3& ps = seq.positions[1];
      const Vec3& pe = seq.positions[seq.positions.size() - 2];
      const double cost = distance(ps, initial) + distance(pe, initial);
      ok = std::abs(cost - best) <= 1e-9 * std::max(1.0, best) && ps.z >= pe.z;
    }
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("%d grids (%d with a boundary pair), %d violations", grids, with_pair, bad)};
}

Outcome path_study() {
  PathStudyConfig cfg;
  cfg.trials = 1000;
  const auto t0 = Clock::now();
  const PathStudyReport rep = path_length_study(cfg);
  const double secs = seconds_since(t0);
  const double per_trial = std::max({rep.max_sppa_seconds, rep.max_etsp_seconds, rep.max_fib_seconds});
  const bool ok = rep.trials.size() >= 1000 && rep.fraction_within_1_5 >= 0.90 &&
                  rep.fraction_sppa_not_longer >= 0.03 && per_trial < 0.5 && secs < 300.0;
  return {ok, fmt("within 1.5: %.1f%%, not longer: %.1f%%, slowest plan %.3f s, total %.1f s",
                  100.0 * rep.fraction_within_1_5, 100.0 * rep.fraction_sppa_not_longer, per_trial, secs)};
}

Outcome rti_penalty_properties() {
  const MpcConfig cfg;
  const double rd = cfg.r_detect_fov, ra = cfg.r_avoid_fov;
  bool ok = rti_penalty(rd, rd, ra) == 0.0;
  ok = ok && std::abs(rti_penalty((rd + ra) / 2.0, rd, ra) - 1.0) <= 1e-12;
  double prev = 0.0, worst = 0.0;
  const int n = 1000;
  for (int i = 1; i < n; ++i) {
    const double d = rd - (rd - ra) * i / n;
    const double p = rti_penalty(d, rd, ra);
    const double oracle = std::pow((d - rd) / (d - ra), 2);
    worst = std::max(worst, std::abs(p - oracle) / std::max(1.0, oracle));
    ok = ok && p > prev;
    prev = p;
  }
  ok = ok && worst <= 1e-12;
  return {ok, fmt("%d grid points, worst deviation %.2g, zero at r_d, one at midpoint", n, worst)};
}

Outcome mpc_soundness() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  std::size_t steps = 0, captured = 0, planned = 0;
  double min_clear = std::numeric_limits<double>::infinity(), min_fov = min_clear;
  const int missions = 100;
  for (int m = 0; m < missions; ++m) {
    MissionConfig c;
    c.generator.v_s = 2;
    c.mission.mpc.seed = static_cast<std::uint64_t>(m + 1);
    const std::size_t count = 1 + rng() % 3;
    while (c.obstacles.size() < count) {
      const Sphere s{c.region.ooi + Vec3{3.0 * u(rng) - 1.5, 4.0 * u(rng) - 2.0, 1.5 * u(rng) - 0.2},
                     0.1 + 0.25 * u(rng)};
      if (distance(s.center, c.initial) < s.radius + 0.8) continue;
      if (distance(s.center, c.camera.position) < s.radius + 1.0) continue;
      c.obstacles.push_back(s);
    }
    const LightingPlan plan = make_plan(c);
    const Sequence seq = make_sequence(c, plan);
    const MissionLog log = simulate_mission(plan, seq, c.obstacle_set(), c.mission);
    planned += plan.size();
    captured += log.captures.size();
    for (const auto& rec : log.records) {
      ++steps;
      min_clear = std::min(min_clear, rec.clearance);
      min_fov = std::min(min_fov, rec.fov);
      if (rec.clearance < 0.0 || rec.fov < 0.0) ++violations;
    }
  }
  return {violations == 0, fmt("%d missions, %zu steps, %d violations, min clearance %.3f, min fov %.3f, "
                               "captured %zu/%zu",
                               missions, steps, violations, min_clear, min_fov, captured, planned)};
}

Outcome cost_gradients() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MpcConfig cfg;
  ObstacleSet obs;
  obs.camera = MissionConfig::default_camera();
  obs.spheres = {{{3.5, -1.2, 0.8}, 0.3}, {{2.4, 1.0, 1.4}, 0.2}, {{3.0, -2.0, 1.6}, 0.25}};
  int checked = 0;
  double worst = 0.0;
  while (checked < 100) {
    const PointMassState s{{3.0 + u(rng), -1.5 + u(rng), 1.0 + 0.5 * u(rng)},
                           {0.5 * u(rng), 0.5 * u(rng), 0.2 * u(rng)},
                           {u(rng), u(rng), u(rng)}};
    ControlSequence c(cfg.horizon);
    for (auto& v : c) v = {u(rng), u(rng), u(rng)};
    std::vector<Vec3> ref(cfg.horizon);
    for (auto& p : ref) p = s.position + Vec3{u(rng), u(rng), u(rng)} * 0.5;
    if (!check_constraints(s, c, obs, cfg).feasible) continue;
    ++checked;
    const ControlSequence g = smooth_cost_gradient(s, c, ref, obs, cfg);
    double err = 0.0, scale = 0.0;
    const double h = 1e-6;
    for (std::size_t k = 0; k < c.size(); ++k)
      for (int a = 0; a < 3; ++a) {
        ControlSequence p = c, q = c;
        double* pa = a == 0 ? &p[k].x : a == 1 ? &p[k].y : &p[k].z;
        double* qa = a == 0 ? &q[k].x : a == 1 ? &q[k].y : &q[k].z;
        *pa += h;
        *qa -= h;
        const double fd = (smooth_cost(s, p, ref, obs, cfg) - smooth_cost(s, q, ref, obs, cfg)) / (2.0 * h);
        const double an = a == 0 ? g[k].x : a == 1 ? g[k].y : g[k].z;
        err += (fd - an) * (fd - an);
        scale += an * an;
      }
    worst = std::max(worst, std::sqrt(err) / std::max(std::sqrt(scale), 1e-8));
  }
  return {worst <= 1e-4, fmt("%d feasible points, worst relative error %.2g", checked, worst)};
}

double mean_abs_steps(const ImageRgb8& a, const ImageRgb8& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
  return sum / static_cast<double>(a.data.size());
}

struct RoundTrip {
  double mean = 0.0;
  double worst_capture = 0.0;
  std::size_t captures = 0;
};

RoundTrip relight_round_trip(double half_width) {
  ScanRegion r = NoiseSweepConfig::default_region();
  r.h_min = r.v_min = -half_width;
  r.h_max = r.v_max = half_width;
  const LightingPlan plan = sppa_plan_near_count(r, 60, {3.0, -1.0, 1.0});
  const CaptureSet set = run_capture(plan, Scene::build(SceneSpec::default_scene()), CameraModel{}, 0.0, 1);
  const PtmImage ptm = fit_ptm(set);
  RoundTrip out;
  for (const auto& cap : set.captures) {
    const double e = mean_abs_steps(relight(ptm, cap.recorded.u, cap.recorded.v), cap.image);
    out.mean += e;
    out.worst_capture = std::max(out.worst_capture, e);
  }
  out.captures = set.captures.size();
  out.mean /= static_cast<double>(out.captures);
  return out;
}

Outcome ptm_fitter() {
  // Inside the model class: every pixel follows a known quadratic.
  std::vector<LightingVector> lights;
  for (int i = 0; i < 24; ++i) {
    const double a = 2.0 * kPi * i / 24.0, rad = 0.2 + 0.6 * ((i * 7) % 5) / 4.0;
    lights.push_back(LightingVector::from_uv(rad * std::cos(a), rad * std::sin(a)));
  }
  const std::array<double, kPtmTerms> alpha{-0.21, -0.17, 0.05, 0.12, -0.08, 0.55};
  const int w = 6, h = 4;
  std::vector<ImageRgbF> imgs;
  std::vector<ImageRgbF> flat;
  for (const auto& l : lights) {
    const auto b = ptm_basis(l.u, l.v);
    double v = 0.0;
    for (int t = 0; t < kPtmTerms; ++t) v += alpha[t] * b[t];
    ImageRgbF img(w, h), c(w, h);
    std::fill(img.data.begin(), img.data.end(), static_cast<float>(v));
    std::fill(c.data.begin(), c.data.end(), 0.4f);
    imgs.push_back(img);
    flat.push_back(c);
  }
  const PtmCoefficients fit = fit_ptm_coefficients(lights, imgs);
  double model_err = 0.0;
  for (int t = 0; t < kPtmTerms; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < fit.pixels(); ++p)
        model_err = std::max(model_err, std::abs(fit.at(ptm_plane(t, ch), p) - alpha[t]));

  const PtmCoefficients cfit = fit_ptm_coefficients(lights, flat);
  double const_err = 0.0;
  for (int t = 0; t < kPtmTerms - 1; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t p = 0; p < cfit.pixels(); ++p)
        const_err = std::max(const_err, std::abs(cfit.at(ptm_plane(t, ch), p)));

  // Asserted on the moderate cap. The wide cap reaches grazing light, where
  // the cosine law leaves the quadratic model; it is reported only.
  const RoundTrip moderate = relight_round_trip(0.6);
  const RoundTrip wide = relight_round_trip(kPi / 3.0);
  const bool ok = model_err <= 1e-6 && const_err <= 1e-6 && moderate.mean <= 3.0;
  return {ok, fmt("model-class error %.2g, constant a1..a5 max %.2g, round-trip mean abs %.2f/255 "
                  "(+-0.6 cap, %zu captures); info: %.2f/255 on the +-pi/3 cap (%zu captures); worst "
                  "single capture %.2f and %.2f",
                  model_err, const_err, moderate.mean, moderate.captures, wide.mean, wide.captures,
                  moderate.worst_capture, wide.worst_capture)};
}

Outcome normal_pipeline() {
  const auto t0 = Clock::now();
  const Scene scene = Scene::build(SceneSpec::default_scene());
  const LightingPlan plan = sppa_plan_near_count(NoiseSweepConfig::default_region(), 60, {3.0, -1.0, 1.0});
  const CaptureSet set = run_capture(plan, scene, CameraModel{}, 0.0, 1);
  const NormalComparison cmp = compare_normals(normal_map(fit_ptm(set)), scene_normals(scene));
  const double secs = seconds_since(t0);
  const bool ok = plan.size() >= 55 && plan.size() <= 65 && scene.width() == 128 && cmp.delta < 0.1 && secs < 120.0;
  return {ok, fmt("%zu positions, %dx%d, mean angle %.4f rad over %zu pixels, %.1f s", plan.size(),
                  scene.width(), scene.height_px(), cmp.delta, cmp.compared, secs)};
}

Outcome noise_sweep_shape() {
  NoiseSweepConfig cfg;
  cfg.trials = 20;
  const auto t0 = Clock::now();
  const NoiseSweepReport rep = noise_sweep(cfg);
  bool ok = rep.points.size() == 5 && rep.points.front().sigma == 0.0 && rep.points.front().mean < 0.05;
  std::string means;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    means += fmt("%.4f ", rep.points[i].mean);
    if (i > 0 && rep.points[i].mean < rep.points[i - 1].mean) ok = false;
  }
  return {ok, fmt("mean delta over sigma {0,0.05,0.1,0.2,0.3}: %s(%.1f s)", means.c_str(), seconds_since(t0))};
}

Outcome mission_demo(const std::string& source_dir) {
  const MissionConfig c = load_config(source_dir + "/configs/demo.json");
  const fs::path out = fs::temp_directory_path() / "rti_acceptance_demo";
  fs::remove_all(out);
  const DemoResult r = run_demo(c, out.string());
  std::vector<std::string> missing;
  for (const char* f : {"manifest.json", "plan.json", "plan.lp", "sequence.json", "sequence.csv", "trajectory.json",
                        "trajectory.csv", "mission_log.jsonl", "mission_captures.json", "captures/captures.lp",
                        "ptm.rtiptm", "normals.png", "normals.nrm", "normals_error.png", "relight_origin.png"})
    if (!fs::exists(out / f) || fs::file_size(out / f) == 0) missing.emplace_back(f);
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(out / "captures"))
    if (e.path().extension() == ".png") ++pngs;
  const bool ok = r.planned > 0 && r.captured == r.planned && r.skipped == 0 && missing.empty() &&
                  pngs == r.captured && r.min_clearance >= 0.0 && r.min_fov >= 0.0;
  return {ok, fmt("captured %zu/%zu, %zu capture images, %zu missing artifacts, flown %.2f m, "
                  "min clearance %.3f, min fov %.3f",
                  r.captured, r.planned, pngs, missing.size(), r.flown_length_m, r.min_clearance, r.min_fov)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string source_dir = argc > 1 ? argv[1] : RTI_SOURCE_DIR;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sequencing oracle equivalence", sequencing_oracle},
      {"SPPA grid arithmetic", sppa_arithmetic},
      {"SPPA sequence validity", sppa_validity},
      {"path-length study", path_study},
      {"FoV penalty properties", rti_penalty_properties},
      {"MPC constraint soundness", mpc_soundness},
      {"cost gradients", cost_gradients},
      {"PTM fitter correctness", ptm_fitter},
      {"normal pipeline", normal_pipeline},
      {"noise sweep shape", noise_sweep_shape},
      {"mission demo", [&] { return mission_demo(source_dir); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
