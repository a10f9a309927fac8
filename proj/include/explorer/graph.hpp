#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "explorer/grid.hpp"

namespace explorer {

// Collision-free graph over belief free space: lattice points in M_f plus the
// robot node (and previously visited positions), edges = symmetric union of
// k-nearest-neighbor candidates that pass line of sight through Free cells.
struct CollisionGraph {
  std::vector<Coord> nodes;
  std::vector<std::vector<int>> adj;  // sorted, symmetric
  int robot_index = -1;
  int k = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

// Collision graph augmented with node utility (observable frontier count)
// and the binary guidepost (visited previously) feature; policy input.
struct InformativeGraph {
  std::vector<Coord> nodes;
  std::vector<double> utility;
  std::vector<uint8_t> guidepost;
  std::vector<std::vector<int>> adj;
  int current_index = -1;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

// Privileged critic input: lattice graph over the whole true free area.
// Unexplored nodes carry utility -1 and explored flag 0.
struct GroundTruthGraph {
  std::vector<Coord> nodes;
  std::vector<double> utility;
  std::vector<uint8_t> explored;
  std::vector<std::vector<int>> adj;
  int current_index = -1;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

// Uniform lattice_dim x lattice_dim points over the map extent (unique,
// row-major order).
std::vector<Coord> lattice_points(int width, int height, int lattice_dim);
double lattice_spacing(int width, int height, int lattice_dim);

// Symmetric union of k-NN candidate edges that pass the line-of-sight
// predicate; adjacency lists sorted ascending.
std::vector<std::vector<int>> knn_los_edges(const std::vector<Coord>& nodes, int k,
                                            const std::function<bool(Coord, Coord)>& los);

CollisionGraph extract_collision_graph(const BeliefMap& belief, Coord robot,
                                       const std::vector<Coord>& extra_nodes,
                                       int lattice_dim, int k);

// u_i = |{f in frontiers : dist(v_i,f) <= sensor_range and line_of_sight}|.
// g_i = 1 iff v_i lies within visit_radius of a path position.
InformativeGraph compute_utilities(const CollisionGraph& graph, const BeliefMap& belief,
                                   const std::vector<Coord>& frontiers, int sensor_range,
                                   const std::vector<Coord>& path, double visit_radius);

// Lattice nodes over all ground-truth free cells plus the robot's visited
// positions; explored iff non-Unknown in belief; explored nodes take their
// informative-graph utility (computed against belief frontiers), unexplored
// nodes take -1. Edges are k-NN + line of sight over the true map.
GroundTruthGraph build_ground_truth_graph(const GroundTruthMap& gt, const BeliefMap& belief,
                                          const std::vector<Coord>& path, int lattice_dim, int k,
                                          int sensor_range,
                                          const InformativeGraph* informative = nullptr);

struct PathResult {
  std::vector<int> nodes;  // from .. to inclusive
  double cost = 0.0;
};

// Euclidean-cost A* with lexicographic node-index tie-breaking; nullopt when
// unreachable.
std::optional<PathResult> astar(const std::vector<Coord>& nodes,
                                const std::vector<std::vector<int>>& adj, int from, int to);

// Line-oriented debug dump: "node idx x y u g" rows then "edge i j" rows.
void dump_graph(const InformativeGraph& graph, std::ostream& out);

}  // namespace explorer
