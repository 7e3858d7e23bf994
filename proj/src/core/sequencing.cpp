#include "rti/sequencing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "rti/common.hpp"

namespace rti {

void Sequence::update_length() { length_m = path_length(positions); }

double path_length(const std::vector<Vec3>& closed_path) {
  double len = 0.0;
  for (std::size_t i = 1; i < closed_path.size(); ++i)
    len += distance(closed_path[i - 1], closed_path[i]);
  return len;
}

std::vector<Vec3> plan_points(const LightingPlan& plan) {
  std::vector<Vec3> pts;
  pts.reserve(plan.size() + 1);
  pts.push_back(plan.initial);
  pts.insert(pts.end(), plan.positions.begin(), plan.positions.end());
  return pts;
}

// ---------------------------------------------------------------------------
// SPPA ordering
// ---------------------------------------------------------------------------

namespace {

struct Grid {
  const LightingPlan& plan;
  std::vector<std::size_t> offset;

  explicit Grid(const LightingPlan& p) : plan(p) {
    std::size_t off = 0;
    for (const auto& row : p.rows) {
      offset.push_back(off);
      off += row.lambda_h.size();
    }
  }
  std::size_t rows() const { return plan.rows.size(); }
  std::size_t cols(std::size_t r) const { return plan.rows[r].lambda_h.size(); }
  const Vec3& at(std::size_t r, std::size_t c) const { return plan.positions[offset[r] + c]; }
  double height(std::size_t r) const { return at(r, 0).z; }
  std::size_t side_col(std::size_t r, bool left) const { return left ? 0 : cols(r) - 1; }
};

class SequenceBuilder {
 public:
  explicit SequenceBuilder(const Grid& g) : grid_(g) {}

  void initial(const Vec3& p) {
    seq_.positions.push_back(p);
    seq_.labels.push_back(SequenceLabel::initial());
  }
  void visit(std::size_t r, std::size_t c) {
    seq_.positions.push_back(grid_.at(r, c));
    seq_.labels.push_back(SequenceLabel::grid(static_cast<int>(r + 1), static_cast<int>(c + 1)));
  }
  Sequence finish() {
    seq_.update_length();
    return std::move(seq_);
  }

 private:
  const Grid& grid_;
  Sequence seq_;
};

// Row indices ordered from the highest world z to the lowest.
std::vector<std::size_t> rows_top_down(const Grid& g) {
  std::vector<std::size_t> order(g.rows());
  std::iota(order.begin(), order.end(), 0);
  if (g.height(g.rows() - 1) > g.height(0)) std::reverse(order.begin(), order.end());
  return order;
}

// Columns of a row in sweep order, skipping the boundary column on the start
// side. `ascending` follows increasing column index.
std::vector<std::size_t> sweep_columns(const Grid& g, std::size_t r, bool ascending,
                                       bool omit_side, bool left) {
  std::vector<std::size_t> cols;
  const std::size_t n = g.cols(r);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = ascending ? k : n - 1 - k;
    if (omit_side && n >= 2 && c == g.side_col(r, left)) continue;
    cols.push_back(c);
  }
  return cols;
}

}  // namespace

BoundaryPair sppa_boundary_pair(const LightingPlan& plan) {
  const Grid g(plan);
  BoundaryPair best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < g.rows(); ++k) {
    const std::size_t i = k + 1;
    if (g.cols(k) < 2 || g.cols(i) < 2) continue;
    for (bool left : {true, false}) {
      const std::size_t ci = g.side_col(i, left), ck = g.side_col(k, left);
      const double cost = distance(g.at(i, ci), plan.initial) + distance(g.at(k, ck), plan.initial);
      if (cost < best_cost) {
        best_cost = cost;
        const bool i_higher = g.height(i) > g.height(k);
        best.start_row = i_higher ? i : k;
        best.end_row = i_higher ? k : i;
        best.start_col = i_higher ? ci : ck;
        best.end_col = i_higher ? ck : ci;
        best.left_side = left;
        best.found = true;
      }
    }
  }
  return best;
}

std::pair<std::size_t, std::size_t> sppa_odd_pair(const LightingPlan& plan) {
  const Grid g(plan);
  require(g.rows() >= 2, "odd-row pairing needs at least two rows");
  std::size_t best = 0, best_count = std::numeric_limits<std::size_t>::max();
  for (std::size_t r = 0; r + 1 < g.rows(); ++r) {
    const std::size_t count = g.cols(r) + g.cols(r + 1);
    if (count < best_count) {
      best_count = count;
      best = r;
    }
  }
  return {best, best + 1};
}

Sequence sppa_sequence(const LightingPlan& plan, OddRowTraversal traversal) {
  require(plan.kind == PlanKind::Sppa, "sppa_sequence needs an SPPA plan");
  require(!plan.rows.empty(), "SPPA plan has no rows");
  for (const auto& row : plan.rows) require(!row.lambda_h.empty(), "SPPA plan has an empty row");

  const Grid g(plan);
  const std::vector<std::size_t> order = rows_top_down(g);
  const BoundaryPair pair = sppa_boundary_pair(plan);
  SequenceBuilder out(g);
  out.initial(plan.initial);

  if (!pair.found) {
    // No two consecutive rows have distinct boundary columns: plain
    // boustrophedon from the top-row corner nearest to P_i.
    const std::size_t top = order.front();
    const bool left =
        distance(g.at(top, 0), plan.initial) <= distance(g.at(top, g.cols(top) - 1), plan.initial);
    bool ascending = left;
    for (std::size_t r : order) {
      for (std::size_t c : sweep_columns(g, r, ascending, false, left)) out.visit(r, c);
      ascending = !ascending;
    }
    out.initial(plan.initial);
    return out.finish();
  }

  const bool left = pair.left_side;
  auto pos_in_order = [&](std::size_t r) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), r) - order.begin());
  };
  const std::size_t start_t = pos_in_order(pair.start_row);
  const std::size_t end_t = pos_in_order(pair.end_row);

  // P_s, then up the boundary to the top row.
  for (std::size_t t = start_t + 1; t-- > 0;) {
    const std::size_t r = order[t];
    if (g.cols(r) >= 2) out.visit(r, g.side_col(r, left));
  }

  // Boustrophedon sweep downward, first row heading away from the start side.
  std::optional<std::pair<std::size_t, std::size_t>> odd;
  if (g.rows() % 2 == 1) odd = sppa_odd_pair(plan);
  bool ascending = left;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const std::size_t r = order[t];
    const bool paired = odd && t + 1 < order.size() &&
                        ((odd->first == r && odd->second == order[t + 1]) ||
                         (odd->second == r && odd->first == order[t + 1]));
    if (!paired) {
      for (std::size_t c : sweep_columns(g, r, ascending, true, left)) out.visit(r, c);
      ascending = !ascending;
      continue;
    }
    const std::size_t r2 = order[t + 1];
    const auto first = sweep_columns(g, r, ascending, true, left);
    const auto second = sweep_columns(g, r2, ascending, true, left);
    if (traversal == OddRowTraversal::DoublePass) {
      for (std::size_t c : first) out.visit(r, c);
      for (std::size_t c : second) out.visit(r2, c);
    } else {
      // Up-side-down-side: merge both rows by horizontal angle, staying in
      // the current row on ties so the path zigzags column by column.
      const double sign = ascending ? 1.0 : -1.0;
      auto key = [&](std::size_t row, std::size_t c) { return sign * plan.rows[row].lambda_h[c]; };
      std::size_t i = 0, j = 0, current = r;
      while (i < first.size() || j < second.size()) {
        bool take_first;
        if (i == first.size()) take_first = false;
        else if (j == second.size()) take_first = true;
        else {
          const double ka = key(r, first[i]), kb = key(r2, second[j]);
          const double tol = 1e-12 * std::max(1.0, std::abs(ka));
          if (ka < kb - tol) take_first = true;
          else if (kb < ka - tol) take_first = false;
          else take_first = current == r;
        }
        if (take_first) {
          out.visit(r, first[i++]);
          current = r;
        } else {
          out.visit(r2, second[j++]);
          current = r2;
        }
      }
    }
    ascending = !ascending;
    ++t;
  }

  // Back up the boundary from the bottom row to P_e.
  for (std::size_t t = order.size(); t-- > end_t;) {
    const std::size_t r = order[t];
    if (g.cols(r) >= 2) out.visit(r, g.side_col(r, left));
  }
  out.initial(plan.initial);
  return out.finish();
}

// ---------------------------------------------------------------------------
// ETSP local search
// ---------------------------------------------------------------------------

namespace {

class TourSearch {
 public:
  TourSearch(const std::vector<Vec3>& pts, std::size_t k) : pts_(pts), n_(pts.size()) {
    build_neighbours(std::min(k, n_ - 1));
  }

  double dist(int a, int b) const { return distance(pts_[a], pts_[b]); }

  std::vector<int> nearest_neighbour(int start) const {
    std::vector<int> tour;
    tour.reserve(n_);
    std::vector<char> used(n_, 0);
    int cur = start;
    used[cur] = 1;
    tour.push_back(cur);
    for (std::size_t step = 1; step < n_; ++step) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c : neigh_[cur]) {
        if (!used[c] && dist(cur, c) < best_d) { best_d = dist(cur, c); best = c; }
      }
      if (best < 0) {
        for (std::size_t c = 0; c < n_; ++c) {
          if (!used[c] && dist(cur, static_cast<int>(c)) < best_d) {
            best_d = dist(cur, static_cast<int>(c));
            best = static_cast<int>(c);
          }
        }
      }
      used[best] = 1;
      tour.push_back(best);
      cur = best;
    }
    return tour;
  }

  void optimize(std::vector<int>& tour) {
    tour_ = std::move(tour);
    pos_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) pos_[tour_[i]] = static_cast<int>(i);
    for (int round = 0; round < 100; ++round) {
      neighbourhood_search();
      if (!full_two_opt_pass()) break;
    }
    tour = std::move(tour_);
  }

 private:
  static constexpr double kEps = 1e-10;

  void build_neighbours(std::size_t k) {
    neigh_.assign(n_, {});
    std::vector<std::pair<double, int>> buf(n_);
    for (std::size_t a = 0; a < n_; ++a) {
      std::size_t m = 0;
      for (std::size_t b = 0; b < n_; ++b)
        if (b != a) buf[m++] = {dist(static_cast<int>(a), static_cast<int>(b)), static_cast<int>(b)};
      std::partial_sort(buf.begin(), buf.begin() + static_cast<long>(k), buf.begin() + static_cast<long>(m));
      for (std::size_t i = 0; i < k; ++i) neigh_[a].push_back(buf[i].second);
    }
  }

  int succ(int c) const { return tour_[(static_cast<std::size_t>(pos_[c]) + 1) % n_]; }
  int pred(int c) const { return tour_[(static_cast<std::size_t>(pos_[c]) + n_ - 1) % n_]; }

  // Reverses tour positions i..j (cyclic, inclusive).
  void reverse(std::size_t i, std::size_t j) {
    std::size_t len = (j + n_ - i) % n_ + 1;
    if (2 * len > n_) {  // reversing the complement is the same cyclic tour
      const std::size_t ni = (j + 1) % n_, nj = (i + n_ - 1) % n_;
      i = ni;
      j = nj;
      len = n_ - len;
    }
    for (std::size_t s = 0; s < len / 2; ++s) {
      const std::size_t a = (i + s) % n_, b = (j + n_ - s) % n_;
      std::swap(tour_[a], tour_[b]);
      pos_[tour_[a]] = static_cast<int>(a);
      pos_[tour_[b]] = static_cast<int>(b);
    }
  }

  // 2-opt replacing (a,b), (c,d) by (a,c), (b,d), where b, d are both the
  // successors (dir 0) or both the predecessors (dir 1) of a, c.
  bool try_two_opt(int a, std::deque<int>& queue) {
    for (int dir = 0; dir < 2; ++dir) {
      const int b = dir == 0 ? succ(a) : pred(a);
      const double d_ab = dist(a, b);
      for (int c : neigh_[a]) {
        const double g1 = d_ab - dist(a, c);
        if (g1 <= kEps) break;
        const int d = dir == 0 ? succ(c) : pred(c);
        if (c == b || d == a) continue;
        const double delta = dist(b, d) - dist(c, d) - g1;
        if (delta < -kEps) {
          if (dir == 0) reverse(static_cast<std::size_t>(pos_[b]), static_cast<std::size_t>(pos_[c]));
          else reverse(static_cast<std::size_t>(pos_[a]), static_cast<std::size_t>(pos_[d]));
          for (int x : {a, b, c, d}) queue.push_back(x);
          return true;
        }
      }
    }
    return false;
  }

  bool try_or_opt(int s1, std::deque<int>& queue) {
    for (std::size_t k = 1; k <= 3 && k + 2 <= n_; ++k) {
      std::vector<int> seg{s1};
      for (std::size_t m = 1; m < k; ++m) seg.push_back(succ(seg.back()));
      const int sk = seg.back();
      const int p = pred(s1), nx = succ(sk);
      if (p == sk || nx == s1) continue;
      const double removal = dist(p, s1) + dist(sk, nx) - dist(p, nx);
      if (removal <= kEps) continue;
      auto in_seg = [&](int x) { return std::find(seg.begin(), seg.end(), x) != seg.end(); };
      for (int end : {s1, sk}) {
        for (int c : neigh_[end]) {
          if (in_seg(c)) continue;
          for (int side = 0; side < 2; ++side) {
            const int e = side == 0 ? succ(c) : pred(c);
            if (in_seg(e)) continue;
            // Insert between the pair (u, v) with u preceding v in the tour.
            const int u = side == 0 ? c : e, v = side == 0 ? e : c;
            if (u == p && v == nx) continue;
            const double base = dist(u, v);
            const double fwd = dist(u, s1) + dist(sk, v) - base;
            const double rev = dist(u, sk) + dist(s1, v) - base;
            const bool reversed = rev < fwd;
            if (std::min(fwd, rev) - removal < -kEps) {
              move_segment(seg, u, reversed);
              for (int x : {p, nx, u, v, s1, sk}) queue.push_back(x);
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  void move_segment(const std::vector<int>& seg, int after, bool reversed) {
    std::vector<int> next;
    next.reserve(n_);
    std::vector<char> in_seg(n_, 0);
    for (int x : seg) in_seg[x] = 1;
    for (int x : tour_) {
      if (in_seg[x]) continue;
      next.push_back(x);
      if (x == after) {
        if (reversed) next.insert(next.end(), seg.rbegin(), seg.rend());
        else next.insert(next.end(), seg.begin(), seg.end());
      }
    }
    tour_ = std::move(next);
    for (std::size_t i = 0; i < n_; ++i) pos_[tour_[i]] = static_cast<int>(i);
  }

  void neighbourhood_search() {
    std::deque<int> queue;
    std::vector<char> queued(n_, 1);
    for (std::size_t i = 0; i < n_; ++i) queue.push_back(tour_[i]);
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop_front();
      queued[a] = 0;
      std::deque<int> touched;
      if (try_two_opt(a, touched) || try_or_opt(a, touched)) {
        touched.push_back(a);
        for (int x : touched) {
          if (!queued[x]) { queued[x] = 1; queue.push_back(x); }
        }
      }
    }
  }

  bool full_two_opt_pass() {
    bool improved = false;
    for (std::size_t i = 0; i + 2 < n_; ++i) {
      for (std::size_t j = i + 2; j < n_; ++j) {
        if (i == 0 && j == n_ - 1) continue;
        const int a = tour_[i], b = tour_[i + 1], c = tour_[j], d = tour_[(j + 1) % n_];
        const double delta = dist(a, c) + dist(b, d) - dist(a, b) - dist(c, d);
        if (delta < -kEps) {
          reverse(i + 1, j);
          improved = true;
        }
      }
    }
    return improved;
  }

  const std::vector<Vec3>& pts_;
  std::size_t n_;
  std::vector<std::vector<int>> neigh_;
  std::vector<int> tour_;
  std::vector<int> pos_;
};

double tour_length(const std::vector<Vec3>& pts, const std::vector<int>& tour) {
  double len = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i)
    len += distance(pts[tour[i]], pts[tour[(i + 1) % tour.size()]]);
  return len;
}

Sequence to_sequence(const std::vector<Vec3>& pts, const std::vector<int>& tour) {
  // Rotate so the start point leads, then close the loop.
  const auto it = std::find(tour.begin(), tour.end(), 0);
  std::vector<int> order(it, tour.end());
  order.insert(order.end(), tour.begin(), it);
  Sequence s;
  for (int c : order) {
    s.positions.push_back(pts[c]);
    s.labels.push_back(c == 0 ? SequenceLabel::initial() : SequenceLabel::flat(c));
  }
  s.positions.push_back(pts[0]);
  s.labels.push_back(SequenceLabel::initial());
  s.update_length();
  return s;
}

}  // namespace

Sequence etsp_tour(const std::vector<Vec3>& points, const EtspOptions& options) {
  require(points.size() >= 2, "ETSP needs at least two points");
  const std::size_t n = points.size();
  if (n <= 3) {
    std::vector<int> tour(n);
    std::iota(tour.begin(), tour.end(), 0);
    return to_sequence(points, tour);
  }
  TourSearch search(points, options.neighbours);
  std::vector<int> best;
  double best_len = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(r));
    const int start = r == 0 ? 0 : static_cast<int>(rng() % n);
    std::vector<int> tour = search.nearest_neighbour(start);
    search.optimize(tour);
    const double len = tour_length(points, tour);
    if (len < best_len - 1e-12) {
      best_len = len;
      best = std::move(tour);
    }
  }
  return to_sequence(points, best);
}

Sequence brute_force_tour(const std::vector<Vec3>& points) {
  require(!points.empty(), "brute-force tour needs at least one point");
  require(points.size() <= 10, "brute-force tour refuses more than 10 points");
  const std::size_t n = points.size();
  std::vector<int> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  std::vector<int> best;
  double best_len = std::numeric_limits<double>::infinity();
  do {
    if (rest.size() >= 2 && rest.front() > rest.back()) continue;  // mirror of another tour
    double len = 0.0;
    int prev = 0;
    for (int c : rest) {
      len += distance(points[prev], points[c]);
      prev = c;
    }
    len += distance(points[prev], points[0]);
    if (len < best_len) {
      best_len = len;
      best = rest;
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  std::vector<int> tour{0};
  tour.insert(tour.end(), best.begin(), best.end());
  return to_sequence(points, tour);
}

double best_two_opt_delta(const std::vector<Vec3>& path) {
  if (path.size() < 5) return 0.0;
  const std::size_t n = path.size() - 1;
  double best = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const double delta = distance(path[i], path[j]) + distance(path[i + 1], path[j + 1]) -
                           distance(path[i], path[i + 1]) - distance(path[j], path[j + 1]);
      best = std::min(best, delta);
    }
  }
  return best;
}

}  // namespace rti
