#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rti/geometry.hpp"
#include "rti/lighting_plan.hpp"

namespace rti {

// Where a sequence entry came from: the initial position, a grid cell
// (1-based row and column), or a flat index into the input points.
struct SequenceLabel {
  enum class Kind { Initial, Grid, Flat };
  Kind kind = Kind::Initial;
  int row = 0;
  int col = 0;  // flat index when kind == Flat

  static SequenceLabel initial() { return {}; }
  static SequenceLabel grid(int r, int c) { return {Kind::Grid, r, c}; }
  static SequenceLabel flat(int i) { return {Kind::Flat, 0, i}; }
  bool operator==(const SequenceLabel&) const = default;
};

// Closed visit order: positions.front() == positions.back() == P_i.
struct Sequence {
  std::vector<Vec3> positions;
  std::vector<SequenceLabel> labels;
  double length_m = 0.0;

  void update_length();
};

double path_length(const std::vector<Vec3>& closed_path);

enum class OddRowTraversal { Zigzag, DoublePass };

// Safety-pilot-predictable ordering of an SPPA grid.
Sequence sppa_sequence(const LightingPlan& plan,
                       OddRowTraversal traversal = OddRowTraversal::Zigzag);

// The boundary pair chosen for the start (higher) and end (lower) of the
// grid part of the SPPA sequence, as 0-based (row, col).
struct BoundaryPair {
  std::size_t start_row = 0, start_col = 0;
  std::size_t end_row = 0, end_col = 0;
  bool left_side = true;
  bool found = false;
};

BoundaryPair sppa_boundary_pair(const LightingPlan& plan);

// Consecutive row pair (lower index first) with the fewest positions.
std::pair<std::size_t, std::size_t> sppa_odd_pair(const LightingPlan& plan);

struct EtspOptions {
  std::uint64_t seed = 0;
  int restarts = 4;
  std::size_t neighbours = 10;
};

// Closed tour over points[0] (the start) and the remaining points,
// nearest-neighbour construction improved by 2-opt and Or-opt to a local
// optimum. Labels are flat indices into `points`.
Sequence etsp_tour(const std::vector<Vec3>& points, const EtspOptions& options = {});

// Exact minimum tour by enumeration; refuses more than 10 points.
Sequence brute_force_tour(const std::vector<Vec3>& points);

// Length of the best single 2-opt move on a closed tour (negative = gain);
// 0 when no move improves. Exposed for the fixpoint property.
double best_two_opt_delta(const std::vector<Vec3>& closed_path);

// Plan points (P_i first) as an ETSP instance.
std::vector<Vec3> plan_points(const LightingPlan& plan);

}  // namespace rti
