#pragma once

#include <vector>

#include "explorer/graph.hpp"

namespace explorer {

// Sparse information graph: all non-zero-utility nodes of the dense graph,
// plus the reference nodes inserted along robot-to-cluster paths, plus the
// robot node. original_index maps sparse node -> dense node.
struct SparseGraph {
  InformativeGraph graph;
  std::vector<int> original_index;
  int skipped_unreachable = 0;  // utility nodes with no dense-graph path
};

// Dense-graph rarefaction. Walks the dense informative graph: every
// non-zero-utility node is kept; for each uncovered one, nearby utility nodes
// within d_th with clear line of sight are marked covered, and the A* path
// from the robot is walked from the node back toward the robot, inserting a
// reference node whenever line of sight from the previous reference breaks or
// the gap reaches d_th. Edges are k-NN + line of sight over the kept nodes,
// plus the reference-chain and coverage links (collision-free by
// construction), so every reachable utility node stays connected to the
// robot. Deterministic for fixed inputs.
SparseGraph rarefy(const InformativeGraph& dense, const BeliefMap& belief, double d_th,
                   int sparse_k);

}  // namespace explorer
