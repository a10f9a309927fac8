#include "explorer/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace explorer {

double distance(Coord a, Coord b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

size_t GroundTruthMap::free_count() const {
  return static_cast<size_t>(std::count(cells_.begin(), cells_.end(), Cell::Free));
}

size_t BeliefMap::count(Cell kind) const {
  return static_cast<size_t>(std::count(cells_.begin(), cells_.end(), kind));
}

void save_map(const GroundTruthMap& map, std::ostream& out) {
  out << map.width() << ' ' << map.height() << ' ' << map.seed() << '\n';
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      out << (map.at(x, y) == Cell::Occupied ? '#' : '.');
    }
    out << '\n';
  }
}

void save_map(const GroundTruthMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open map file for writing: " + path);
  save_map(map, out);
}

GroundTruthMap load_map(std::istream& in) {
  int w = 0, h = 0;
  uint64_t seed = 0;
  if (!(in >> w >> h >> seed) || w <= 0 || h <= 0) {
    throw std::runtime_error("malformed map header");
  }
  in.ignore();  // newline after header
  GroundTruthMap map(w, h, seed);
  std::string line;
  for (int y = 0; y < h; ++y) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) < w) {
      throw std::runtime_error("map row " + std::to_string(y) + " truncated");
    }
    for (int x = 0; x < w; ++x) {
      switch (line[x]) {
        case '#': map.set(x, y, Cell::Occupied); break;
        case '.': map.set(x, y, Cell::Free); break;
        default: throw std::runtime_error("bad map character");
      }
    }
  }
  return map;
}

GroundTruthMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  return load_map(in);
}

bool free_region_connected(const GroundTruthMap& map) {
  const int w = map.width(), h = map.height();
  std::vector<uint8_t> seen(static_cast<size_t>(w) * h, 0);
  Coord start{-1, -1};
  size_t total_free = 0;
  for (int y = 0; y < h && start.x < 0; ++y) {
    for (int x = 0; x < w; ++x) {
      if (map.at(x, y) == Cell::Free) {
        start = {x, y};
        break;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (map.at(x, y) == Cell::Free) ++total_free;
    }
  }
  if (start.x < 0) return total_free == 0;

  std::vector<Coord> stack{start};
  seen[static_cast<size_t>(start.y) * w + start.x] = 1;
  size_t reached = 0;
  while (!stack.empty()) {
    const Coord c = stack.back();
    stack.pop_back();
    ++reached;
    const Coord nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
    for (const Coord n : nbrs) {
      if (!map.in_bounds(n.x, n.y)) continue;
      uint8_t& mark = seen[static_cast<size_t>(n.y) * w + n.x];
      if (!mark && map.at(n.x, n.y) == Cell::Free) {
        mark = 1;
        stack.push_back(n);
      }
    }
  }
  return reached == total_free;
}

}  // namespace explorer
