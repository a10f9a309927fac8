#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace explorer {

enum class Cell : uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

struct Coord {
  int x = 0;
  int y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

double distance(Coord a, Coord b);

// True occupancy of the bounded environment. Immutable after generation;
// shared read-only across workers. The boundary ring is always Occupied.
class GroundTruthMap {
 public:
  GroundTruthMap() = default;
  GroundTruthMap(int width, int height, uint64_t seed)
      : width_(width), height_(height), seed_(seed),
        cells_(static_cast<size_t>(width) * height, Cell::Occupied) {}

  int width() const { return width_; }
  int height() const { return height_; }
  uint64_t seed() const { return seed_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  Cell at(int x, int y) const { return cells_[static_cast<size_t>(y) * width_ + x]; }
  Cell at(Coord c) const { return at(c.x, c.y); }
  void set(int x, int y, Cell v) { cells_[static_cast<size_t>(y) * width_ + x] = v; }
  bool free_at(Coord c) const { return at(c) == Cell::Free; }

  size_t free_count() const;

  friend bool operator==(const GroundTruthMap&, const GroundTruthMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  uint64_t seed_ = 0;
  std::vector<Cell> cells_;
};

// Robot belief over the same extent: Free / Occupied / Unknown partition.
// Non-Unknown cells always match ground truth; cells never return to Unknown.
class BeliefMap {
 public:
  BeliefMap() = default;
  BeliefMap(int width, int height)
      : width_(width), height_(height),
        cells_(static_cast<size_t>(width) * height, Cell::Unknown) {}

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  Cell at(int x, int y) const { return cells_[static_cast<size_t>(y) * width_ + x]; }
  Cell at(Coord c) const { return at(c.x, c.y); }
  void set(int x, int y, Cell v) { cells_[static_cast<size_t>(y) * width_ + x] = v; }
  void set(Coord c, Cell v) { set(c.x, c.y, v); }
  bool free_at(Coord c) const { return at(c) == Cell::Free; }

  size_t count(Cell kind) const;

  friend bool operator==(const BeliefMap&, const BeliefMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
};

// Text map format: header "W H seed", then H rows of W chars, '#'=Occupied,
// '.'=Free. Round-trips bit-exactly.
void save_map(const GroundTruthMap& map, std::ostream& out);
void save_map(const GroundTruthMap& map, const std::string& path);
GroundTruthMap load_map(std::istream& in);
GroundTruthMap load_map(const std::string& path);

// Rooms-and-corridors generator (BSP splits, L-shaped corridors).
// Deterministic for a fixed seed; free region 4-connected; free-area fraction
// in [0.15, 0.6]; throws std::invalid_argument below 32x32 and std::runtime_error
// if the internal retry budget is exhausted.
GroundTruthMap generate_map(uint64_t seed, int width, int height);

// True iff every Free cell is reachable from every other by 4-neighbor moves.
bool free_region_connected(const GroundTruthMap& map);

}  // namespace explorer
