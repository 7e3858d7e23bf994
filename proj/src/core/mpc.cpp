#include "rti/mpc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rti/common.hpp"

namespace rti {

void MpcConfig::validate() const {
  require(horizon >= 1, "MPC horizon must be at least 1");
  require(dt > 0.0, "MPC time step must be positive");
  for (double w : {w_position, w_control, w_obstacle, w_rti, w_orientation, w_orient_rate})
    require(w >= 0.0, "MPC weights must be non-negative");
  require(r_avoid_fov < r_detect_fov, "avoidance radius must be smaller than detection radius");
  require(accel_limit > 0.0 && vel_limit > 0.0, "acceleration and velocity limits must be positive");
  require(yaw_rate_limit >= 0.0 && pitch_rate_limit >= 0.0, "rate limits must be non-negative");
  require(pitch_min <= pitch_max, "pitch limits are inverted");
  require(uav_radius >= 0.0 && hinge_softness > 0.0, "invalid UAV radius or hinge softness");
  require(cem_elites >= 1 && cem_elites <= cem_samples, "CEM elites must be in [1, samples]");
}

void ObstacleSet::validate() const {
  for (const auto& s : spheres) require(s.radius > 0.0, "obstacle radii must be positive");
  require(camera_uav_radius >= 0.0, "camera UAV radius must be non-negative");
  camera.validate();
}

Rollout rollout(const PointMassState& state, const ControlSequence& u, double dt) {
  Rollout r;
  r.positions.reserve(u.size());
  r.velocities.reserve(u.size());
  Vec3 p = state.position, v = state.velocity;
  for (const Vec3& a : u) {
    p = p + v * dt + a * (0.5 * dt * dt);
    v = v + a * dt;
    r.positions.push_back(p);
    r.velocities.push_back(v);
  }
  return r;
}

namespace {

double clamp_axis(double a, double v, const MpcConfig& cfg) {
  const double lo = std::max(-cfg.accel_limit, (-cfg.vel_limit - v) / cfg.dt);
  const double hi = std::min(cfg.accel_limit, (cfg.vel_limit - v) / cfg.dt);
  if (lo > hi) return v > 0.0 ? -cfg.accel_limit : cfg.accel_limit;
  return std::clamp(a, lo, hi);
}

double softplus(double y) { return y > 30.0 ? y : std::log1p(std::exp(y)); }
double logistic(double y) { return 1.0 / (1.0 + std::exp(-y)); }

struct SphereTerm {
  Vec3 center;
  double radius;  // including the light UAV radius
};

std::vector<SphereTerm> sphere_terms(const ObstacleSet& obstacles, const MpcConfig& cfg) {
  std::vector<SphereTerm> out;
  out.reserve(obstacles.spheres.size() + 1);
  for (const auto& s : obstacles.spheres) out.push_back({s.center, s.radius + cfg.uav_radius});
  out.push_back({obstacles.camera.position, obstacles.camera_uav_radius + cfg.uav_radius});
  return out;
}

}  // namespace

ControlSequence project_controls(const PointMassState& state, const ControlSequence& u,
                                 const MpcConfig& cfg) {
  ControlSequence out(u.size());
  Vec3 v = state.velocity;
  for (std::size_t k = 0; k < u.size(); ++k) {
    out[k] = {clamp_axis(u[k].x, v.x, cfg), clamp_axis(u[k].y, v.y, cfg),
              clamp_axis(u[k].z, v.z, cfg)};
    v = v + out[k] * cfg.dt;
  }
  return out;
}

double rti_penalty(double d_fov, double r_detect, double r_avoid, double cap) {
  if (d_fov >= r_detect) return 0.0;
  if (d_fov <= r_avoid) return cap;
  const double ratio = (d_fov - r_detect) / (d_fov - r_avoid);
  return std::min(ratio * ratio, cap);
}

double smooth_hinge(double x, double softness) {
  const double s = softness * softplus(-x / softness);
  return s * s;
}

double smooth_hinge_derivative(double x, double softness) {
  const double y = -x / softness;
  return -2.0 * softness * softplus(y) * logistic(y);
}

double obstacle_clearance(const Vec3& p, const ObstacleSet& obstacles, const MpcConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sphere_terms(obstacles, cfg)) best = std::min(best, distance(p, s.center) - s.radius);
  return best;
}

PositionCost position_cost(const PointMassState& state, const ControlSequence& u,
                           const std::vector<Vec3>& reference, const ObstacleSet& obstacles,
                           const MpcConfig& cfg) {
  require(reference.size() >= u.size(), "reference window shorter than the control horizon");
  const Rollout r = rollout(state, u, cfg.dt);
  const auto spheres = sphere_terms(obstacles, cfg);
  PositionCost c;
  Vec3 prev = state.last_control;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec3& p = r.positions[k];
    c.position += (p - reference[k]).squared_norm();
    c.control += (u[k] - prev).squared_norm();
    prev = u[k];
    for (const auto& s : spheres)
      c.obstacle += smooth_hinge(distance(p, s.center) - s.radius - cfg.obstacle_margin, cfg.hinge_softness);
    c.rti += rti_penalty(fov_distance(p, obstacles.camera), cfg.r_detect_fov, cfg.r_avoid_fov, cfg.rti_cap);
  }
  c.total = cfg.w_position * c.position + cfg.w_control * c.control +
            cfg.w_obstacle * c.obstacle + cfg.w_rti * c.rti;
  return c;
}

double smooth_cost(const PointMassState& state, const ControlSequence& u,
                   const std::vector<Vec3>& reference, const ObstacleSet& obstacles,
                   const MpcConfig& cfg) {
  const PositionCost c = position_cost(state, u, reference, obstacles, cfg);
  return cfg.w_position * c.position + cfg.w_control * c.control + cfg.w_obstacle * c.obstacle;
}

ControlSequence smooth_cost_gradient(const PointMassState& state, const ControlSequence& u,
                                     const std::vector<Vec3>& reference,
                                     const ObstacleSet& obstacles, const MpcConfig& cfg) {
  const std::size_t n = u.size();
  const Rollout r = rollout(state, u, cfg.dt);
  const auto spheres = sphere_terms(obstacles, cfg);
  // dJ/dp_k for the position and obstacle terms.
  std::vector<Vec3> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& p = r.positions[k];
    g[k] = (p - reference[k]) * (2.0 * cfg.w_position);
    for (const auto& s : spheres) {
      const Vec3 d = p - s.center;
      const double len = d.norm();
      if (len <= 0.0) continue;
      const double x = len - s.radius - cfg.obstacle_margin;
      g[k] += d * (cfg.w_obstacle * smooth_hinge_derivative(x, cfg.hinge_softness) / len);
    }
  }
  // p_k (1-based) depends on u_j (j < k) with weight (k - j - 1/2) dt^2.
  const double dt2 = cfg.dt * cfg.dt;
  ControlSequence grad(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec3 acc;
    for (std::size_t k = j; k < n; ++k)
      acc += g[k] * ((static_cast<double>(k - j) + 0.5) * dt2);
    const Vec3 prev = j == 0 ? state.last_control : u[j - 1];
    acc += (u[j] - prev) * (2.0 * cfg.w_control);
    if (j + 1 < n) acc -= (u[j + 1] - u[j]) * (2.0 * cfg.w_control);
    grad[j] = acc;
  }
  return grad;
}

ConstraintReport check_constraints(const PointMassState& state, const ControlSequence& u,
                                   const ObstacleSet& obstacles, const MpcConfig& cfg) {
  const Rollout r = rollout(state, u, cfg.dt);
  ConstraintReport rep;
  rep.min_clearance = std::numeric_limits<double>::infinity();
  rep.min_fov = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    rep.min_clearance = std::min(rep.min_clearance, obstacle_clearance(r.positions[k], obstacles, cfg));
    rep.min_fov = std::min(rep.min_fov, fov_distance(r.positions[k], obstacles.camera));
    const Vec3& v = r.velocities[k];
    rep.max_speed_axis = std::max({rep.max_speed_axis, std::abs(v.x), std::abs(v.y), std::abs(v.z)});
    rep.max_accel_axis = std::max({rep.max_accel_axis, std::abs(u[k].x), std::abs(u[k].y), std::abs(u[k].z)});
  }
  constexpr double tol = 1e-9;
  if (rep.max_accel_axis > cfg.accel_limit + tol || rep.max_speed_axis > cfg.vel_limit + tol)
    rep.violated = "g_c (input/velocity limits)";
  else if (rep.min_clearance < 0.0)
    rep.violated = "g_obs (obstacle clearance)";
  else if (rep.min_fov < 0.0)
    rep.violated = "g_rti (camera field of view)";
  rep.feasible = rep.violated.empty();
  return rep;
}

namespace {

struct Candidate {
  ControlSequence u;
  PositionCost cost;
  ConstraintReport report;

  double violation() const {
    return std::max(0.0, -report.min_clearance) + std::max(0.0, -report.min_fov);
  }
  // Feasible candidates rank by cost, infeasible ones by violation after them.
  bool better_than(const Candidate& o) const {
    if (report.feasible != o.report.feasible) return report.feasible;
    if (report.feasible) return cost.total < o.cost.total;
    return violation() < o.violation();
  }
};

class PositionSearch {
 public:
  PositionSearch(const PointMassState& s, const std::vector<Vec3>& ref, const ObstacleSet& obs,
                 const MpcConfig& cfg)
      : state_(s), ref_(ref), obs_(obs), cfg_(cfg) {}

  Candidate evaluate(const ControlSequence& raw) {
    Candidate c;
    c.u = project_controls(state_, raw, cfg_);
    c.cost = position_cost(state_, c.u, ref_, obs_, cfg_);
    c.report = check_constraints(state_, c.u, obs_, cfg_);
    ++evaluations;
    if (!best || c.better_than(*best)) best = c;
    return c;
  }

  ControlSequence tracking_law() const {
    ControlSequence u(cfg_.horizon);
    Vec3 p = state_.position, v = state_.velocity;
    for (std::size_t k = 0; k < cfg_.horizon; ++k) {
      Vec3 v_des = (ref_[k] - p) / cfg_.dt;
      const double speed = v_des.norm();
      if (speed > cfg_.vel_limit) v_des = v_des * (cfg_.vel_limit / speed);
      u[k] = (v_des - v) / cfg_.dt;
      u[k] = {clamp_axis(u[k].x, v.x, cfg_), clamp_axis(u[k].y, v.y, cfg_), clamp_axis(u[k].z, v.z, cfg_)};
      p = p + v * cfg_.dt + u[k] * (0.5 * cfg_.dt * cfg_.dt);
      v = v + u[k] * cfg_.dt;
    }
    return u;
  }

  ControlSequence braking() const {
    ControlSequence u(cfg_.horizon);
    Vec3 v = state_.velocity;
    for (auto& a : u) {
      a = {clamp_axis(-v.x / cfg_.dt, v.x, cfg_), clamp_axis(-v.y / cfg_.dt, v.y, cfg_),
           clamp_axis(-v.z / cfg_.dt, v.z, cfg_)};
      v = v + a * cfg_.dt;
    }
    return u;
  }

  std::optional<Candidate> best;
  std::size_t evaluations = 0;

 private:
  const PointMassState& state_;
  const std::vector<Vec3>& ref_;
  const ObstacleSet& obs_;
  const MpcConfig& cfg_;
};

}  // namespace

PositionSolution solve_position_mpc(const PointMassState& state,
                                    const std::vector<Vec3>& reference,
                                    const ObstacleSet& obstacles, const MpcConfig& cfg,
                                    const std::optional<ControlSequence>& warm_start,
                                    std::uint64_t step_seed) {
  const std::size_t n = cfg.horizon;
  require(reference.size() >= n, "reference window shorter than the MPC horizon");
  PositionSearch search(state, reference, obstacles, cfg);

  search.evaluate(search.tracking_law());
  search.evaluate(search.braking());
  search.evaluate(ControlSequence(n));
  if (warm_start && warm_start->size() == n) {
    ControlSequence shifted(warm_start->begin() + 1, warm_start->end());
    const Rollout tail = rollout(state, shifted, cfg.dt);
    const Vec3 v = tail.velocities.empty() ? state.velocity : tail.velocities.back();
    shifted.push_back(-v / cfg.dt);  // brake on the appended step
    search.evaluate(shifted);
  }

  // Cross-entropy refinement around the best candidate so far.
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull ^ (step_seed + 0x632BE59BD9B4E019ull));
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlSequence mean = search.best->u;
  std::vector<Vec3> sigma(n, Vec3{1, 1, 1} * (0.5 * cfg.accel_limit));
  for (std::size_t it = 0; it < cfg.cem_iterations; ++it) {
    std::vector<Candidate> pop;
    pop.reserve(cfg.cem_samples);
    for (std::size_t s = 0; s < cfg.cem_samples; ++s) {
      ControlSequence u(n);
      for (std::size_t k = 0; k < n; ++k)
        u[k] = mean[k] + Vec3{sigma[k].x * normal(rng), sigma[k].y * normal(rng), sigma[k].z * normal(rng)};
      pop.push_back(search.evaluate(u));
    }
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Candidate& a, const Candidate& b) { return a.better_than(b); });
    const std::size_t elites = cfg.cem_elites;
    for (std::size_t k = 0; k < n; ++k) {
      Vec3 m, var;
      for (std::size_t e = 0; e < elites; ++e) m += pop[e].u[k];
      m = m / static_cast<double>(elites);
      for (std::size_t e = 0; e < elites; ++e) {
        const Vec3 d = pop[e].u[k] - m;
        var += Vec3{d.x * d.x, d.y * d.y, d.z * d.z};
      }
      var = var / static_cast<double>(elites);
      mean[k] = m;
      const double floor = 0.02 * cfg.accel_limit;
      sigma[k] = {std::max(std::sqrt(var.x), floor), std::max(std::sqrt(var.y), floor),
                  std::max(std::sqrt(var.z), floor)};
    }
  }

  // Coordinate refinement of the incumbent.
  double step = 0.25 * cfg.accel_limit;
  for (std::size_t sweep = 0; sweep < cfg.refine_sweeps; ++sweep, step *= 0.5) {
    for (std::size_t k = 0; k < n; ++k) {
      for (int axis = 0; axis < 3; ++axis) {
        for (double sgn : {1.0, -1.0}) {
          ControlSequence u = search.best->u;
          double& coord = axis == 0 ? u[k].x : axis == 1 ? u[k].y : u[k].z;
          coord += sgn * step;
          search.evaluate(u);
        }
      }
    }
  }

  const Candidate& best = *search.best;
  if (!best.report.feasible)
    fail(ErrorCode::Infeasible, "no feasible control sequence; violated " + best.report.violated);
  PositionSolution sol;
  sol.controls = best.u;
  sol.cost = best.cost;
  sol.constraints = best.report;
  sol.evaluations = search.evaluations;
  return sol;
}

// ---------------------------------------------------------------------------
// Orientation
// ---------------------------------------------------------------------------

Bearing desired_bearing(const Vec3& light_pos, const Vec3& ooi) {
  const Vec3 d = ooi - light_pos;
  return {std::atan2(d.y, d.x), std::atan2(d.z, std::hypot(d.x, d.y))};
}

OrientationCost orientation_cost(const OrientationState& state,
                                 const std::vector<double>& yaw_rates,
                                 const std::vector<double>& pitch_rates, const Bearing& target,
                                 const MpcConfig& cfg) {
  OrientationCost c;
  double yaw = state.yaw, pitch = state.pitch;
  double prev_y = state.last_yaw_rate, prev_p = state.last_pitch_rate;
  for (std::size_t k = 0; k < yaw_rates.size(); ++k) {
    yaw += cfg.dt * yaw_rates[k];
    pitch += cfg.dt * pitch_rates[k];
    const double ey = normalize_angle(yaw - target.yaw);
    const double ep = pitch - target.pitch;
    c.orientation += ey * ey + ep * ep;
    c.rate_change += (yaw_rates[k] - prev_y) * (yaw_rates[k] - prev_y) +
                     (pitch_rates[k] - prev_p) * (pitch_rates[k] - prev_p);
    prev_y = yaw_rates[k];
    prev_p = pitch_rates[k];
  }
  c.total = cfg.w_orientation * c.orientation + cfg.w_orient_rate * c.rate_change;
  return c;
}

namespace {

// One axis of the orientation QP: angle driven by rate inputs, quadratic
// tracking plus rate-change penalty, rate box and angle box.
std::vector<double> solve_axis(double angle0, double last_rate, double target, double rate_limit,
                               double lo, double hi, const MpcConfig& cfg) {
  const std::size_t n = cfg.horizon;
  const double dt = cfg.dt, zeta = cfg.w_orientation, kappa = cfg.w_orient_rate;
  std::vector<double> w(n, 0.0);
  if (rate_limit <= 0.0) return w;
  lo = std::min(lo, angle0);
  hi = std::max(hi, angle0);

  auto feasible = [&](const std::vector<double>& rates) {
    double a = angle0;
    for (double r : rates) {
      if (std::abs(r) > rate_limit + 1e-12) return false;
      a += dt * r;
      if (a < lo - 1e-12 || a > hi + 1e-12) return false;
    }
    return true;
  };

  // Unconstrained optimum from the normal equations.
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) lower(k, j) = 1.0;
    diff(k, k) = 1.0;
    if (k > 0) diff(k, k - 1) = -1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(0) = last_rate;
  const Eigen::MatrixXd h = zeta * dt * dt * lower.transpose() * lower + kappa * diff.transpose() * diff;
  const Eigen::VectorXd rhs = -zeta * dt * (angle0 - target) * lower.transpose() * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)) +
                              kappa * diff.transpose() * b;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() == Eigen::Success && h.norm() > 0.0) {
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    for (std::size_t k = 0; k < n; ++k) w[k] = sol(static_cast<Eigen::Index>(k));
  }
  if (feasible(w)) return w;

  // Project onto the feasible set, then exact coordinate descent.
  double a = angle0;
  for (double& r : w) {
    r = std::clamp(r, std::max(-rate_limit, (lo - a) / dt), std::min(rate_limit, (hi - a) / dt));
    a += dt * r;
  }
  std::vector<double> angle(n);
  for (int sweep = 0; sweep < 500; ++sweep) {
    a = angle0;
    for (std::size_t k = 0; k < n; ++k) angle[k] = (a += dt * w[k]);
    double biggest = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double sum_err = 0.0, max_a = -std::numeric_limits<double>::infinity(),
             min_a = std::numeric_limits<double>::infinity();
      for (std::size_t k = j; k < n; ++k) {
        sum_err += angle[k] - target;
        max_a = std::max(max_a, angle[k]);
        min_a = std::min(min_a, angle[k]);
      }
      const double prev = j == 0 ? last_rate : w[j - 1];
      const bool has_next = j + 1 < n;
      const double quad = zeta * dt * dt * static_cast<double>(n - j) + kappa * (has_next ? 2.0 : 1.0);
      double lin = 2.0 * zeta * dt * sum_err + 2.0 * kappa * (w[j] - prev);
      if (has_next) lin -= 2.0 * kappa * (w[j + 1] - w[j]);
      double delta = quad > 0.0 ? -lin / (2.0 * quad) : 0.0;
      const double d_lo = std::max(-rate_limit - w[j], (lo - min_a) / dt);
      const double d_hi = std::min(rate_limit - w[j], (hi - max_a) / dt);
      delta = std::clamp(delta, std::min(d_lo, 0.0), std::max(d_hi, 0.0));
      if (delta != 0.0) {
        w[j] += delta;
        for (std::size_t k = j; k < n; ++k) angle[k] += dt * delta;
        biggest = std::max(biggest, std::abs(delta));
      }
    }
    if (biggest < 1e-12) break;
  }
  return w;
}

}  // namespace

OrientationSolution solve_orientation_mpc(const OrientationState& state, const Bearing& desired,
                                          const MpcConfig& cfg) {
  OrientationSolution sol;
  sol.target.yaw = state.yaw + normalize_angle(desired.yaw - state.yaw);
  sol.target.pitch = std::clamp(desired.pitch, cfg.pitch_min, cfg.pitch_max);
  sol.target_residual = std::abs(desired.pitch - sol.target.pitch);
  const double inf = std::numeric_limits<double>::infinity();
  sol.yaw_rates = solve_axis(state.yaw, state.last_yaw_rate, sol.target.yaw, cfg.yaw_rate_limit,
                             -inf, inf, cfg);
  sol.pitch_rates = solve_axis(state.pitch, state.last_pitch_rate, sol.target.pitch,
                               cfg.pitch_rate_limit, cfg.pitch_min, cfg.pitch_max, cfg);
  sol.cost = orientation_cost(state, sol.yaw_rates, sol.pitch_rates, sol.target, cfg);
  return sol;
}

}  // namespace rti
