#include "explorer/visibility.hpp"

#include <algorithm>
#include <stdexcept>

namespace explorer {

namespace {

template <class MapT>
bool los_impl(const MapT& map, Coord a, Coord b) {
  bool clear = true;
  trace_segment(a, b, [&](Coord c) {
    if (map.at(c) != Cell::Free) clear = false;
  });
  return clear;
}

}  // namespace

bool line_of_sight(const BeliefMap& belief, Coord a, Coord b) { return los_impl(belief, a, b); }
bool line_of_sight(const GroundTruthMap& map, Coord a, Coord b) { return los_impl(map, a, b); }

void raycast_update(const GroundTruthMap& gt, BeliefMap& belief, Coord pos, int range) {
  if (!gt.in_bounds(pos.x, pos.y) || gt.at(pos) != Cell::Free) {
    throw std::invalid_argument("raycast_update: robot position is not free in ground truth");
  }
  belief.set(pos, Cell::Free);
  if (range <= 0) return;

  const int64_t r2 = static_cast<int64_t>(range) * range;
  const int x0 = std::max(0, pos.x - range), x1 = std::min(gt.width() - 1, pos.x + range);
  const int y0 = std::max(0, pos.y - range), y1 = std::min(gt.height() - 1, pos.y + range);
  const int bw = x1 - x0 + 1;

  // Pass 1: center-of-cell visibility over the sensor disc.
  std::vector<uint8_t> visible(static_cast<size_t>(bw) * (y1 - y0 + 1), 0);
  const auto vis_at = [&](int x, int y) -> uint8_t& {
    return visible[static_cast<size_t>(y - y0) * bw + (x - x0)];
  };
  for (int y = y0; y <= y1; ++y) {
    const int64_t dy = y - pos.y;
    for (int x = x0; x <= x1; ++x) {
      const int64_t dx = x - pos.x;
      if (dx * dx + dy * dy > r2) continue;
      const Coord target{x, y};
      bool blocked = false;
      trace_segment(pos, target, [&](Coord c) {
        if (blocked || (c == target)) return;
        if (gt.at(c) == Cell::Occupied) blocked = true;
      });
      if (!blocked) {
        vis_at(x, y) = 1;
        belief.set(target, gt.at(target));
      }
    }
  }

  // Pass 2: grazing hits. Beams that reach a visible free cell continue into
  // the occupied cells behind its far edges; center-of-cell visibility alone
  // never reveals walls seen at shallow angles, which leaves permanently
  // unresolvable frontiers along them.
  for (int y = y0; y <= y1; ++y) {
    const int64_t dy = y - pos.y;
    for (int x = x0; x <= x1; ++x) {
      const int64_t dx = x - pos.x;
      const int64_t d2 = dx * dx + dy * dy;
      if (d2 > r2 || vis_at(x, y) || gt.at(x, y) != Cell::Occupied) continue;
      const Coord nbrs[4] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
      for (const Coord f : nbrs) {
        if (f.x < x0 || f.x > x1 || f.y < y0 || f.y > y1) continue;
        if (!vis_at(f.x, f.y) || gt.at(f) != Cell::Free) continue;
        const int64_t fdx = f.x - pos.x, fdy = f.y - pos.y;
        if (fdx * fdx + fdy * fdy <= d2) {
          belief.set(x, y, Cell::Occupied);
          break;
        }
      }
    }
  }
}

std::vector<Coord> detect_frontiers(const BeliefMap& belief) {
  std::vector<Coord> out;
  const int w = belief.width(), h = belief.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (belief.at(x, y) != Cell::Free) continue;
      const Coord nbrs[4] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
      for (const Coord n : nbrs) {
        if (belief.in_bounds(n.x, n.y) && belief.at(n) == Cell::Unknown) {
          out.push_back({x, y});
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace explorer
