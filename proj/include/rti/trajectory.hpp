#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rti/sequencing.hpp"

namespace rti {

struct TrajectorySample {
  double time = 0.0;
  Vec3 position;
  bool is_rti_hold = false;
  std::optional<std::size_t> rti_index;  // index into Sequence::positions
};

// Time-sampled reference: straight legs sampled at spacing <= d_rti and
// n_hover identical samples at every RTI position.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  double d_rti = 0.0;
  std::size_t n_hover = 1;

  double path_length() const;
};

std::size_t hover_repetitions(double t_stab, double dt);

Trajectory generate_trajectory(const Sequence& seq, double v_des, double dt, double t_stab);

}  // namespace rti
