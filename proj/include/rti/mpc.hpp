#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rti/geometry.hpp"

namespace rti {

// Tuning of both MPC loops. Defaults are desk-scale choices, not values
// taken from any flight system.
struct MpcConfig {
  std::size_t horizon = 10;  // N
  double dt = 0.2;

  // Position cost weights.
  double w_position = 1.0;    // alpha
  double w_control = 0.05;    // beta
  double w_obstacle = 5.0;    // gamma
  double w_rti = 0.5;         // delta
  // Orientation cost weights.
  double w_orientation = 1.0;    // zeta
  double w_orient_rate = 0.05;   // kappa

  double r_detect_fov = 0.2;  // r_d,FoV
  double r_avoid_fov = 0.05;  // r_a,FoV
  double rti_cap = 1e6;       // per-step cap at the J_rti singularity

  double accel_limit = 2.0;   // m/s^2, per axis
  double vel_limit = 1.0;     // m/s, per axis
  double yaw_rate_limit = 1.5;    // rad/s
  double pitch_rate_limit = 1.5;  // rad/s
  double pitch_min = -kPi / 2.0;
  double pitch_max = kPi / 2.0;

  double uav_radius = 0.15;        // light UAV body radius
  double obstacle_margin = 0.3;    // J_obs starts growing inside this clearance
  double hinge_softness = 0.05;

  // Sampled-search settings.
  std::size_t cem_samples = 32;
  std::size_t cem_elites = 6;
  std::size_t cem_iterations = 3;
  std::size_t refine_sweeps = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

// Everything the light UAV must avoid: static spheres and the camera UAV,
// which is also the source of the field-of-view keep-out wedge.
struct ObstacleSet {
  std::vector<Sphere> spheres;
  CameraModel camera;
  double camera_uav_radius = 0.25;

  void validate() const;
};

struct PointMassState {
  Vec3 position;
  Vec3 velocity;
  Vec3 last_control;
};

using ControlSequence = std::vector<Vec3>;  // accelerations u_0 .. u_{N-1}

struct Rollout {
  std::vector<Vec3> positions;   // p_1 .. p_N
  std::vector<Vec3> velocities;  // v_1 .. v_N
};

// Discrete double integrator, exact for piecewise-constant acceleration.
Rollout rollout(const PointMassState& state, const ControlSequence& u, double dt);

// Clamps controls so every step respects the acceleration box and the
// resulting velocities stay inside the velocity box.
ControlSequence project_controls(const PointMassState& state, const ControlSequence& u,
                                 const MpcConfig& cfg);

// Single step of the FoV penalty, (min{0, (d - r_d)/(d - r_a)})^2, capped.
double rti_penalty(double d_fov, double r_detect, double r_avoid, double cap = 1e6);

double smooth_hinge(double x, double softness);
double smooth_hinge_derivative(double x, double softness);

struct PositionCost {
  double total = 0.0;
  double position = 0.0;   // J_pos
  double control = 0.0;    // J_c
  double obstacle = 0.0;   // J_obs
  double rti = 0.0;        // J_rti
};

// `reference` holds the N reference positions matched with p_1 .. p_N.
PositionCost position_cost(const PointMassState& state, const ControlSequence& u,
                           const std::vector<Vec3>& reference, const ObstacleSet& obstacles,
                           const MpcConfig& cfg);

// Analytic gradient of alpha J_pos + beta J_c + gamma J_obs with respect to u.
ControlSequence smooth_cost_gradient(const PointMassState& state, const ControlSequence& u,
                                     const std::vector<Vec3>& reference,
                                     const ObstacleSet& obstacles, const MpcConfig& cfg);

double smooth_cost(const PointMassState& state, const ControlSequence& u,
                   const std::vector<Vec3>& reference, const ObstacleSet& obstacles,
                   const MpcConfig& cfg);

// Clearance of a light UAV at p from every obstacle sphere and the camera UAV.
double obstacle_clearance(const Vec3& p, const ObstacleSet& obstacles, const MpcConfig& cfg);

struct ConstraintReport {
  double min_clearance = 0.0;  // g_obs holds when >= 0
  double min_fov = 0.0;        // g_rti holds when >= 0
  double max_speed_axis = 0.0;
  double max_accel_axis = 0.0;
  bool feasible = false;
  std::string violated;  // empty when feasible
};

ConstraintReport check_constraints(const PointMassState& state, const ControlSequence& u,
                                   const ObstacleSet& obstacles, const MpcConfig& cfg);

struct PositionSolution {
  ControlSequence controls;
  PositionCost cost;
  ConstraintReport constraints;
  std::size_t evaluations = 0;
};

// Feasible control sequence no worse than the best candidate examined
// (warm start, tracking law, braking, sampled and refined sequences).
// Throws Error(Infeasible) naming the violated constraint when none is.
PositionSolution solve_position_mpc(const PointMassState& state,
                                    const std::vector<Vec3>& reference,
                                    const ObstacleSet& obstacles, const MpcConfig& cfg,
                                    const std::optional<ControlSequence>& warm_start = std::nullopt,
                                    std::uint64_t step_seed = 0);

// ---------------------------------------------------------------------------
// Orientation loop: yaw and pitch of the light, driven by rate inputs.
// ---------------------------------------------------------------------------

struct OrientationState {
  double yaw = 0.0;
  double pitch = 0.0;
  double last_yaw_rate = 0.0;
  double last_pitch_rate = 0.0;
};

struct Bearing {
  double yaw = 0.0;
  double pitch = 0.0;
};

// Direction from the light toward the object of interest.
Bearing desired_bearing(const Vec3& light_pos, const Vec3& ooi);

struct OrientationCost {
  double total = 0.0;
  double orientation = 0.0;  // J_or
  double rate_change = 0.0;  // J_co
};

OrientationCost orientation_cost(const OrientationState& state,
                                 const std::vector<double>& yaw_rates,
                                 const std::vector<double>& pitch_rates, const Bearing& target,
                                 const MpcConfig& cfg);

struct OrientationSolution {
  std::vector<double> yaw_rates;
  std::vector<double> pitch_rates;
  OrientationCost cost;
  Bearing target;          // after clamping to the pitch limits
  double target_residual;  // |desired - clamped target| in pitch
};

OrientationSolution solve_orientation_mpc(const OrientationState& state, const Bearing& desired,
                                          const MpcConfig& cfg);

}  // namespace rti
