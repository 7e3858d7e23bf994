#include "rti/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>

#include "rti/common.hpp"
#include "rti/ptm.hpp"

namespace rti {

DemoResult run_demo(const MissionConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(out_dir);
  const fs::path d(out_dir);
  auto path = [&](const char* name) { return (d / name).string(); };

  const LightingPlan plan = make_plan(config);
  write_json(path("plan.json"), to_json(plan));
  write_text(path("plan.lp"), format_lp(plan_lp_entries(plan, config.camera)));

  const Sequence seq = make_sequence(config, plan);
  write_json(path("sequence.json"), to_json(seq));
  write_text(path("sequence.csv"), sequence_csv(seq));

  const Trajectory traj = generate_trajectory(seq, config.mission.v_des, config.mission.mpc.dt, config.mission.t_stab);
  write_json(path("trajectory.json"), to_json(traj));
  write_text(path("trajectory.csv"), trajectory_csv(traj));

  const MissionLog log = simulate_mission(plan, seq, config.obstacle_set(), config.mission);
  write_text(path("mission_log.jsonl"), mission_log_jsonl(log));
  write_json(path("mission_captures.json"), mission_captures_manifest(log));

  const Scene scene = Scene::build(config.scene);
  const CaptureSet captures = run_capture(log, scene, plan.region.distance, config.sigma, config.seed);
  save_capture_set(path("captures"), captures);

  const PtmImage ptm = fit_ptm(captures);
  write_rtiptm(path("ptm.rtiptm"), ptm);
  write_png(path("relight_origin.png"), relight(ptm, 0.0, 0.0));

  const NormalMap normals = normal_map(ptm);
  write_normal_map(path("normals.png"), path("normals.nrm"), normals);
  const NormalComparison cmp = compare_normals(normals, scene_normals(scene));
  PngText legend;
  write_png(path("normals_error.png"), heatmap(cmp, 0.0, &legend), legend);

  DemoResult r;
  r.planned = plan.size();
  r.captured = log.captures.size();
  r.skipped = log.skipped.size();
  r.fallback_steps = log.fallback_steps;
  r.sequence_length_m = seq.length_m;
  r.flown_length_m = log.flown_length();
  r.min_clearance = std::numeric_limits<double>::infinity();
  r.min_fov = std::numeric_limits<double>::infinity();
  r.min_fov_at_capture = std::numeric_limits<double>::infinity();
  for (const auto& rec : log.records) {
    r.min_clearance = std::min(r.min_clearance, rec.clearance);
    r.min_fov = std::min(r.min_fov, rec.fov);
    if (rec.capture) r.min_fov_at_capture = std::min(r.min_fov_at_capture, rec.fov);
  }
  r.normal_error_rad = cmp.delta;
  r.manifest_path = path("manifest.json");

  const Json manifest{
      {"config", to_json(config)},
      {"artifacts",
       {{"plan", "plan.json"}, {"plan_lp", "plan.lp"}, {"sequence", "sequence.json"},
        {"sequence_csv", "sequence.csv"}, {"trajectory", "trajectory.json"}, {"trajectory_csv", "trajectory.csv"},
        {"mission_log", "mission_log.jsonl"}, {"mission_captures", "mission_captures.json"},
        {"captures", "captures/captures.json"}, {"captures_lp", "captures/captures.lp"}, {"ptm", "ptm.rtiptm"},
        {"relight_origin", "relight_origin.png"}, {"normal_map", "normals.png"}, {"normal_sidecar", "normals.nrm"},
        {"normal_error_heatmap", "normals_error.png"}}},
      {"summary",
       {{"planned_positions", r.planned}, {"captured", r.captured}, {"skipped", r.skipped},
        {"fallback_steps", r.fallback_steps}, {"sequence_length_m", r.sequence_length_m},
        {"flown_length_m", r.flown_length_m}, {"min_clearance_m", r.min_clearance}, {"min_fov_m", r.min_fov},
        {"normal_error_vs_scene_rad", r.normal_error_rad}}}};
  write_json(r.manifest_path, manifest);
  return r;
}

}  // namespace rti
