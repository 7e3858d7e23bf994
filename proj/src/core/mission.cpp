#include "rti/mission.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rti/common.hpp"

namespace rti {

double MissionLog::flown_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i)
    len += distance(records[i - 1].light_position, records[i].light_position);
  return len;
}

namespace {

bool last_hold_sample(const Trajectory& traj, std::size_t idx) {
  const auto& cur = traj.samples[idx];
  if (idx + 1 >= traj.samples.size()) return true;
  const auto& next = traj.samples[idx + 1];
  return !next.is_rti_hold || next.rti_index != cur.rti_index;
}

}  // namespace

MissionLog simulate_mission(const LightingPlan& plan, const Sequence& seq,
                            const ObstacleSet& obstacles, const MissionSettings& settings) {
  const MpcConfig& cfg = settings.mpc;
  cfg.validate();
  obstacles.validate();
  require(seq.positions.size() >= 2, "mission needs a closed sequence");
  require(seq.positions.size() == seq.labels.size(), "sequence labels do not match positions");
  require(settings.capture_tolerance > 0.0, "capture tolerance must be positive");

  const Trajectory traj = generate_trajectory(seq, settings.v_des, cfg.dt, settings.t_stab);
  const std::size_t horizon = cfg.horizon;
  const std::size_t last = traj.samples.size() - 1;
  const auto max_wait = static_cast<std::size_t>(std::ceil(settings.capture_timeout / cfg.dt));
  const auto max_return = static_cast<std::size_t>(std::ceil(settings.return_timeout / cfg.dt));
  const Vec3 ooi = plan.region.ooi;

  MissionLog log;
  log.camera = obstacles.camera;
  log.ooi = ooi;
  log.dt = cfg.dt;

  PointMassState state{seq.positions.front(), {}, {}};
  const Bearing start_bearing = desired_bearing(state.position, ooi);
  OrientationState orient{start_bearing.yaw, std::clamp(start_bearing.pitch, cfg.pitch_min, cfg.pitch_max), 0.0, 0.0};

  std::optional<ControlSequence> previous;
  std::set<std::size_t> done;  // captured or skipped rti indices
  std::size_t ref = 0, waited = 0, returning = 0;
  double time = 0.0;

  for (std::uint64_t step = 0;; ++step) {
    const TrajectorySample& cur = traj.samples[ref];
    const bool gated = cur.is_rti_hold && cur.rti_index && !done.count(*cur.rti_index);

    std::vector<Vec3> window(horizon);
    for (std::size_t k = 0; k < horizon; ++k)
      window[k] = gated ? cur.position : traj.samples[std::min(ref + 1 + k, last)].position;

    MissionRecord rec;
    ControlSequence plan_u;
    try {
      PositionSolution sol = solve_position_mpc(state, window, obstacles, cfg, previous, step);
      plan_u = std::move(sol.controls);
      rec.position_cost = sol.cost;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      // Keep flying the previously verified plan; its next step is known to
      // satisfy every constraint.
      rec.fallback = true;
      ++log.fallback_steps;
      if (previous && previous->size() > 1) {
        plan_u.assign(previous->begin() + 1, previous->end());
        plan_u.push_back(-(state.velocity) / cfg.dt);
      } else {
        plan_u.assign(horizon, -(state.velocity) / cfg.dt);
      }
      plan_u = project_controls(state, plan_u, cfg);
      rec.position_cost = position_cost(state, plan_u, window, obstacles, cfg);
    }

    const Rollout next = rollout(state, {plan_u.front()}, cfg.dt);
    state.position = next.positions.front();
    state.velocity = next.velocities.front();
    state.last_control = plan_u.front();
    previous = plan_u;

    const OrientationSolution osol = solve_orientation_mpc(orient, desired_bearing(state.position, ooi), cfg);
    orient.yaw = normalize_angle(orient.yaw + cfg.dt * osol.yaw_rates.front());
    orient.pitch += cfg.dt * osol.pitch_rates.front();
    orient.last_yaw_rate = osol.yaw_rates.front();
    orient.last_pitch_rate = osol.pitch_rates.front();

    time += cfg.dt;
    rec.time = time;
    rec.light_position = state.position;
    rec.light_velocity = state.velocity;
    rec.light_yaw = orient.yaw;
    rec.light_pitch = orient.pitch;
    rec.reference = cur.position;
    rec.orientation_cost = osol.cost;
    rec.clearance = obstacle_clearance(state.position, obstacles, cfg);
    rec.fov = fov_distance(state.position, obstacles.camera);

    bool advance = true;
    if (gated && last_hold_sample(traj, ref)) {
      const std::size_t rti = *cur.rti_index;
      const double err = distance(state.position, cur.position);
      if (err < settings.capture_tolerance && rec.fov >= 0.0 && rec.clearance >= 0.0) {
        CaptureEvent ev;
        ev.id = log.captures.size();
        ev.rti_index = rti;
        ev.label = seq.labels[rti];
        ev.time = time;
        ev.true_position = state.position;
        ev.commanded_position = cur.position;
        ev.light_yaw = orient.yaw;
        ev.light_pitch = orient.pitch;
        ev.lighting = lighting_vector(state.position, ooi, obstacles.camera);
        rec.capture = true;
        rec.capture_id = ev.id;
        log.captures.push_back(ev);
        done.insert(rti);
        waited = 0;
      } else if (++waited > max_wait) {
        std::string reason = "position error " + std::to_string(err) + " m after waiting";
        if (fov_distance(cur.position, obstacles.camera) < 0.0)
          reason = "commanded position lies inside the camera field of view";
        else if (obstacle_clearance(cur.position, obstacles, cfg) < 0.0)
          reason = "commanded position collides with an obstacle";
        log.skipped.push_back({rti, cur.position, reason});
        done.insert(rti);
        waited = 0;
      } else {
        advance = false;
      }
    }
    log.records.push_back(rec);

    if (ref == last) {
      const bool home = distance(state.position, cur.position) < settings.capture_tolerance &&
                        state.velocity.norm() < 0.05;
      if (home || ++returning > max_return) break;
    } else if (advance) {
      ++ref;
    }
  }
  return log;
}

}  // namespace rti
