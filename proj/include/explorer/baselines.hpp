#pragma once

#include "explorer/graph.hpp"
#include "explorer/rng.hpp"

namespace explorer {

struct PlannerDecision {
  int target = -1;        // node index; -1 means no candidate target
  std::vector<int> path;  // node sequence, current node first
  double score = 0.0;     // A* cost (nearest) or decayed-utility score

  bool valid() const { return target >= 0; }
};

// Node with utility > threshold at minimal A* cost from the current node;
// cost ties break toward the lower node index. No reachable candidate ->
// invalid decision (caller falls back to the completion check).
// exclude_visited drops guidepost-marked nodes: a viewpoint already sensed
// keeps seeing the same range-ring frontiers, so re-targeting it never
// advances the map.
PlannerDecision nearest_frontier(const InformativeGraph& g, double utility_threshold = 0.0,
                                 bool exclude_visited = false);

// Argmax of u_i * exp(-lambda * cost_i) over reachable nodes with utility >
// threshold; ties toward the lower node index. lambda = 0 reduces to pure
// max-utility.
PlannerDecision utility_frontier(const InformativeGraph& g, double lambda,
                                 double utility_threshold = 0.0, bool exclude_visited = false);

// Uniform choice among the current node's neighbors.
PlannerDecision random_walker(const InformativeGraph& g, Rng& rng);

// Decay rate so the cost-utility score halves every 20 lattice spacings.
double default_utility_lambda(double spacing);

}  // namespace explorer
