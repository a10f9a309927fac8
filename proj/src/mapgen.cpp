#include <algorithm>
#include <stdexcept>
#include <vector>

#include "explorer/grid.hpp"
#include "explorer/rng.hpp"

namespace explorer {

namespace {

struct Rect {
  int x, y, w, h;  // interior region available for carving
};

struct Room {
  int x, y, w, h;
  Coord center() const { return {x + w / 2, y + h / 2}; }
};

void carve_room(GroundTruthMap& map, const Room& r) {
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) map.set(x, y, Cell::Free);
  }
}

// Corridors must be wider than the 30x30 lattice spacing so that graph nodes
// land inside them; hairline corridors leave regions no node can reach.
int corridor_width(const GroundTruthMap& map) {
  const double spacing = std::max((map.width() - 1) / 29.0, (map.height() - 1) / 29.0);
  return std::max(3, static_cast<int>(std::ceil(spacing)) + 2);
}

void carve_h(GroundTruthMap& map, int x0, int x1, int y_center) {
  if (x0 > x1) std::swap(x0, x1);
  const int half = corridor_width(map) / 2;
  for (int y = std::max(1, y_center - half);
       y <= std::min(map.height() - 2, y_center - half + corridor_width(map) - 1); ++y) {
    for (int x = x0; x <= x1; ++x) map.set(x, y, Cell::Free);
  }
}

void carve_v(GroundTruthMap& map, int y0, int y1, int x_center) {
  if (y0 > y1) std::swap(y0, y1);
  const int half = corridor_width(map) / 2;
  for (int x = std::max(1, x_center - half);
       x <= std::min(map.width() - 2, x_center - half + corridor_width(map) - 1); ++x) {
    for (int y = y0; y <= y1; ++y) map.set(x, y, Cell::Free);
  }
}

// L-shaped corridor between two room centers; elbow order randomized.
void carve_corridor(GroundTruthMap& map, Rng& rng, Coord a, Coord b) {
  if (rng.bernoulli(0.5)) {
    carve_h(map, a.x, b.x, a.y);
    carve_v(map, a.y, b.y, b.x);
  } else {
    carve_v(map, a.y, b.y, a.x);
    carve_h(map, a.x, b.x, b.y);
  }
}

// Recursive BSP: splits until leaves are small, places one room per leaf,
// connects sibling subtrees room-center to room-center. Returns a room
// representative for the subtree.
Room split(GroundTruthMap& map, Rng& rng, Rect region, int min_leaf) {
  const bool can_split_x = region.w >= 2 * min_leaf;
  const bool can_split_y = region.h >= 2 * min_leaf;
  if (can_split_x || can_split_y) {
    bool split_x;
    if (can_split_x && can_split_y) {
      split_x = region.w > region.h ? true : region.w < region.h ? false : rng.bernoulli(0.5);
    } else {
      split_x = can_split_x;
    }
    if (split_x) {
      const int cut = region.x + min_leaf + rng.uniform_int(region.w - 2 * min_leaf + 1);
      const Room left = split(map, rng, {region.x, region.y, cut - region.x, region.h}, min_leaf);
      const Room right = split(map, rng, {cut, region.y, region.x + region.w - cut, region.h}, min_leaf);
      carve_corridor(map, rng, left.center(), right.center());
      return rng.bernoulli(0.5) ? left : right;
    }
    const int cut = region.y + min_leaf + rng.uniform_int(region.h - 2 * min_leaf + 1);
    const Room top = split(map, rng, {region.x, region.y, region.w, cut - region.y}, min_leaf);
    const Room bottom = split(map, rng, {region.x, cut, region.w, region.y + region.h - cut}, min_leaf);
    carve_corridor(map, rng, top.center(), bottom.center());
    return rng.bernoulli(0.5) ? top : bottom;
  }

  // Leaf: room occupies a random sub-rectangle, margin 1 inside the leaf.
  const int max_w = region.w - 2;
  const int max_h = region.h - 2;
  const int rw = std::max(3, 2 * max_w / 5 + rng.uniform_int(std::max(1, 3 * max_w / 10)));
  const int rh = std::max(3, 2 * max_h / 5 + rng.uniform_int(std::max(1, 3 * max_h / 10)));
  Room room;
  room.w = std::min(rw, max_w);
  room.h = std::min(rh, max_h);
  room.x = region.x + 1 + rng.uniform_int(max_w - room.w + 1);
  room.y = region.y + 1 + rng.uniform_int(max_h - room.h + 1);
  carve_room(map, room);
  return room;
}

double free_fraction(const GroundTruthMap& map) {
  return static_cast<double>(map.free_count()) /
         (static_cast<double>(map.width()) * map.height());
}

}  // namespace

GroundTruthMap generate_map(uint64_t seed, int width, int height) {
  if (width < 32 || height < 32) {
    throw std::invalid_argument("map dimensions must be at least 32x32");
  }
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(attempt)));
    GroundTruthMap map(width, height, seed);
    const int min_leaf = std::max(12, std::min(width, height) / 4);
    split(map, rng, {1, 1, width - 2, height - 2}, min_leaf);

    const double frac = free_fraction(map);
    if (frac < 0.15 || frac > 0.6) continue;
    if (!free_region_connected(map)) continue;
    return map;
  }
  throw std::runtime_error("map generation retry budget exhausted");
}

}  // namespace explorer
