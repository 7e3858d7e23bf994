#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rti/lighting_plan.hpp"
#include "rti/mpc.hpp"
#include "rti/sequencing.hpp"
#include "rti/trajectory.hpp"

namespace rti {

struct MissionSettings {
  double v_des = 0.5;
  double t_stab = 1.0;
  double capture_tolerance = 0.05;  // epsilon_capture, metres
  double capture_timeout = 10.0;    // seconds spent waiting before an RTI position is skipped
  double return_timeout = 10.0;     // seconds allowed to settle back at P_i
  MpcConfig mpc;
};

struct MissionRecord {
  double time = 0.0;
  Vec3 light_position;
  Vec3 light_velocity;
  double light_yaw = 0.0;
  double light_pitch = 0.0;
  Vec3 reference;
  PositionCost position_cost;
  OrientationCost orientation_cost;
  double clearance = 0.0;  // actual clearance after the step
  double fov = 0.0;        // actual signed FoV distance after the step
  bool fallback = false;   // solver was infeasible, shifted plan applied
  bool capture = false;
  std::optional<std::size_t> capture_id;
};

struct CaptureEvent {
  std::size_t id = 0;
  std::size_t rti_index = 0;  // index into Sequence::positions
  SequenceLabel label;
  double time = 0.0;
  Vec3 true_position;
  Vec3 commanded_position;
  double light_yaw = 0.0;
  double light_pitch = 0.0;
  LightingVector lighting;  // from the true position
};

struct SkippedPosition {
  std::size_t rti_index = 0;
  Vec3 commanded_position;
  std::string reason;
};

struct MissionLog {
  CameraModel camera;
  Vec3 ooi;
  double dt = 0.0;
  std::vector<MissionRecord> records;
  std::vector<CaptureEvent> captures;
  std::vector<SkippedPosition> skipped;
  std::size_t fallback_steps = 0;

  double flown_length() const;
};

// Closed-loop flight of the light UAV along the sampled sequence: position
// and orientation MPC every dt, one capture per reachable RTI position.
MissionLog simulate_mission(const LightingPlan& plan, const Sequence& seq,
                            const ObstacleSet& obstacles, const MissionSettings& settings);

}  // namespace rti
