#include "explorer/rarefy.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "explorer/visibility.hpp"

namespace explorer {

SparseGraph rarefy(const InformativeGraph& dense, const BeliefMap& belief, double d_th,
                   int sparse_k) {
  assert(dense.current_index >= 0);
  const int n = dense.node_count();
  const int robot = dense.current_index;

  std::vector<int> utility_nodes;
  for (int i = 0; i < n; ++i) {
    if (dense.utility[i] > 0.0) utility_nodes.push_back(i);
  }

  std::set<int> selected(utility_nodes.begin(), utility_nodes.end());
  selected.insert(robot);  // the policy needs a node at the robot position
  std::vector<uint8_t> covered(n, 0);
  std::vector<std::pair<int, int>> extra_edges;
  int skipped = 0;

  for (const int v : utility_nodes) {
    if (covered[v]) continue;
    // Group: nearby utility nodes with clear line of sight are covered by v.
    for (const int other : utility_nodes) {
      if (covered[other]) continue;
      if (distance(dense.nodes[v], dense.nodes[other]) > d_th) continue;
      if (!line_of_sight(belief, dense.nodes[v], dense.nodes[other])) continue;
      covered[other] = 1;
      if (other != v) extra_edges.emplace_back(v, other);
    }

    const auto path = astar(dense.nodes, dense.adj, robot, v);
    if (!path) {
      ++skipped;
      continue;
    }
    // Walk the path from the node back toward the robot; whenever sight from
    // the reference breaks or the gap reaches d_th, the previous waypoint
    // becomes the new reference.
    std::vector<int> walk(path->nodes.rbegin(), path->nodes.rend());
    int ref = walk.front();
    for (size_t i = 1; i < walk.size(); ++i) {
      const int w = walk[i];
      if (!line_of_sight(belief, dense.nodes[ref], dense.nodes[w]) ||
          distance(dense.nodes[ref], dense.nodes[w]) >= d_th) {
        const int next_ref = walk[i - 1];
        if (next_ref != ref) extra_edges.emplace_back(ref, next_ref);
        ref = next_ref;
        selected.insert(ref);
      }
    }
    if (ref != robot) extra_edges.emplace_back(ref, robot);
  }

  SparseGraph sparse;
  sparse.skipped_unreachable = skipped;
  sparse.original_index.assign(selected.begin(), selected.end());
  std::vector<int> remap(n, -1);
  for (size_t i = 0; i < sparse.original_index.size(); ++i) {
    remap[sparse.original_index[i]] = static_cast<int>(i);
  }

  InformativeGraph& g = sparse.graph;
  const int m = static_cast<int>(sparse.original_index.size());
  g.nodes.reserve(m);
  g.utility.reserve(m);
  g.guidepost.reserve(m);
  for (const int orig : sparse.original_index) {
    g.nodes.push_back(dense.nodes[orig]);
    g.utility.push_back(dense.utility[orig]);
    g.guidepost.push_back(dense.guidepost[orig]);
  }
  g.current_index = remap[robot];

  g.adj = knn_los_edges(g.nodes, sparse_k,
                        [&](Coord a, Coord b) { return line_of_sight(belief, a, b); });
  for (const auto& [a, b] : extra_edges) {
    const int i = remap[a], j = remap[b];
    assert(i >= 0 && j >= 0);
    g.adj[i].push_back(j);
    g.adj[j].push_back(i);
  }
  for (auto& list : g.adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return sparse;
}

}  // namespace explorer
