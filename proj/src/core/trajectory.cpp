#include "rti/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "rti/common.hpp"

namespace rti {

double Trajectory::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    len += distance(samples[i - 1].position, samples[i].position);
  return len;
}

std::size_t hover_repetitions(double t_stab, double dt) {
  // The ratio is snapped before ceil so 1.0 / 0.2 stays 5, not 6.
  const double ratio = t_stab / dt;
  const double snapped = std::abs(ratio - std::round(ratio)) < 1e-9 ? std::round(ratio) : ratio;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(snapped)));
}

Trajectory generate_trajectory(const Sequence& seq, double v_des, double dt, double t_stab) {
  require(v_des > 0.0, "desired velocity must be positive");
  require(dt > 0.0, "sampling period must be positive");
  require(t_stab >= 0.0, "stabilisation time must be non-negative");
  require(!seq.positions.empty(), "cannot sample an empty sequence");

  Trajectory traj;
  traj.dt = dt;
  traj.d_rti = v_des * dt;
  traj.n_hover = hover_repetitions(t_stab, dt);

  auto push = [&](const Vec3& p, bool hold, std::optional<std::size_t> idx) {
    TrajectorySample s;
    s.time = static_cast<double>(traj.samples.size()) * dt;
    s.position = p;
    s.is_rti_hold = hold;
    s.rti_index = idx;
    traj.samples.push_back(s);
  };

  const auto& pts = seq.positions;
  if (pts.size() == 1) {
    for (std::size_t k = 0; k < traj.n_hover; ++k) push(pts[0], false, std::nullopt);
    return traj;
  }

  push(pts[0], false, std::nullopt);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 a = pts[i - 1], b = pts[i];
    const double len = distance(a, b);
    const double ratio = len / traj.d_rti;
    const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
    for (std::size_t k = 1; k < segments; ++k)
      push(a + (b - a) * (static_cast<double>(k) / static_cast<double>(segments)), false, std::nullopt);
    const bool is_rti = i + 1 < pts.size();
    if (is_rti) {
      for (std::size_t k = 0; k < traj.n_hover; ++k) push(b, true, i);
    } else {
      push(b, false, std::nullopt);
    }
  }
  return traj;
}

}  // namespace rti
