#pragma once

#include <cstdint>
#include <vector>

#include "explorer/grid.hpp"

namespace explorer {

// Visits, in order from a to b inclusive, every cell whose interior the open
// segment between the two cell centers crosses. Exact integer arithmetic in
// doubled coordinates (centers at odd, boundaries at even integers); a
// crossing exactly through a lattice corner steps diagonally, so cells the
// segment merely touches at a corner are not visited. The visited set is
// symmetric in a and b.
template <class Fn>
void trace_segment(Coord a, Coord b, Fn&& visit) {
  const int64_t px = 2 * a.x + 1, py = 2 * a.y + 1;
  const int64_t dx = (2 * b.x + 1) - px, dy = (2 * b.y + 1) - py;
  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;

  Coord c = a;
  visit(c);
  while (c.x != b.x || c.y != b.y) {
    if (dy == 0) {
      c.x += step_x;
    } else if (dx == 0) {
      c.y += step_y;
    } else {
      // Next boundary crossings: t = num/den with den > 0.
      int64_t num_x = 2 * (c.x + (step_x > 0 ? 1 : 0)) - px;
      int64_t den_x = dx;
      if (den_x < 0) { num_x = -num_x; den_x = -den_x; }
      int64_t num_y = 2 * (c.y + (step_y > 0 ? 1 : 0)) - py;
      int64_t den_y = dy;
      if (den_y < 0) { num_y = -num_y; den_y = -den_y; }
      const int64_t lhs = num_x * den_y;
      const int64_t rhs = num_y * den_x;
      if (lhs < rhs) {
        c.x += step_x;
      } else if (lhs > rhs) {
        c.y += step_y;
      } else {
        c.x += step_x;
        c.y += step_y;
      }
    }
    visit(c);
  }
}

// True iff every cell on the segment a->b (endpoints included) is Free.
bool line_of_sight(const BeliefMap& belief, Coord a, Coord b);
bool line_of_sight(const GroundTruthMap& map, Coord a, Coord b);

// Lidar belief update at cell granularity (dense-ray limit): every cell of
// the sensor disc (Euclidean radius `range`) whose view line from pos
// crosses only Free ground-truth cells takes its true class in the belief;
// the first Occupied cell on a view line is itself visible (recorded
// Occupied), and occupied cells behind the far edges of a visible free cell
// are grazing hits (recorded Occupied too). All other cells are unchanged.
// Idempotent for a fixed pose. Throws if pos is not Free in ground truth.
void raycast_update(const GroundTruthMap& gt, BeliefMap& belief, Coord pos, int range);

// Free cells with at least one Unknown 4-neighbor, in row-major order.
std::vector<Coord> detect_frontiers(const BeliefMap& belief);

}  // namespace explorer
