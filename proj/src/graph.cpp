#include "explorer/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_map>

#include "explorer/visibility.hpp"

namespace explorer {

namespace {

int64_t dist2(Coord a, Coord b) {
  const int64_t dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct CoordHash {
  size_t operator()(Coord c) const {
    return static_cast<size_t>(c.x) * 1000003u + static_cast<size_t>(c.y);
  }
};

}  // namespace

std::vector<std::vector<int>> knn_los_edges(const std::vector<Coord>& nodes, int k,
                                            const std::function<bool(Coord, Coord)>& los) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<int>> adj(n);
  std::vector<std::pair<int64_t, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    cand.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(dist2(nodes[i], nodes[j]), j);
    }
    const int take = std::min<int>(k, static_cast<int>(cand.size()));
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
    for (int c = 0; c < take; ++c) {
      const int j = cand[c].second;
      if (los(nodes[i], nodes[j])) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<Coord> lattice_points(int width, int height, int lattice_dim) {
  assert(lattice_dim >= 2);
  std::vector<int> xs, ys;
  xs.reserve(lattice_dim);
  ys.reserve(lattice_dim);
  for (int i = 0; i < lattice_dim; ++i) {
    xs.push_back(static_cast<int>(std::lround(static_cast<double>(i) * (width - 1) / (lattice_dim - 1))));
    ys.push_back(static_cast<int>(std::lround(static_cast<double>(i) * (height - 1) / (lattice_dim - 1))));
  }
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<Coord> pts;
  pts.reserve(xs.size() * ys.size());
  for (int y : ys) {
    for (int x : xs) pts.push_back({x, y});
  }
  return pts;
}

double lattice_spacing(int width, int height, int lattice_dim) {
  return 0.5 * (static_cast<double>(width - 1) / (lattice_dim - 1) +
                static_cast<double>(height - 1) / (lattice_dim - 1));
}

CollisionGraph extract_collision_graph(const BeliefMap& belief, Coord robot,
                                       const std::vector<Coord>& extra_nodes,
                                       int lattice_dim, int k) {
  CollisionGraph g;
  g.k = k;
  std::unordered_map<Coord, int, CoordHash> index;
  for (const Coord p : lattice_points(belief.width(), belief.height(), lattice_dim)) {
    if (belief.free_at(p) && !index.count(p)) {
      index.emplace(p, static_cast<int>(g.nodes.size()));
      g.nodes.push_back(p);
    }
  }
  for (const Coord p : extra_nodes) {
    if (belief.free_at(p) && !index.count(p)) {
      index.emplace(p, static_cast<int>(g.nodes.size()));
      g.nodes.push_back(p);
    }
  }
  if (!index.count(robot)) {
    index.emplace(robot, static_cast<int>(g.nodes.size()));
    g.nodes.push_back(robot);
  }
  g.robot_index = index.at(robot);
  g.adj = knn_los_edges(g.nodes, k, [&](Coord a, Coord b) { return line_of_sight(belief, a, b); });
  return g;
}

InformativeGraph compute_utilities(const CollisionGraph& graph, const BeliefMap& belief,
                                   const std::vector<Coord>& frontiers, int sensor_range,
                                   const std::vector<Coord>& path, double visit_radius) {
  InformativeGraph g;
  g.nodes = graph.nodes;
  g.adj = graph.adj;
  g.current_index = graph.robot_index;
  const int n = g.node_count();
  g.utility.assign(n, 0.0);
  g.guidepost.assign(n, 0);

  const int64_t r2 = static_cast<int64_t>(sensor_range) * sensor_range;
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (const Coord f : frontiers) {
      if (dist2(g.nodes[i], f) > r2) continue;
      if (line_of_sight(belief, g.nodes[i], f)) ++count;
    }
    g.utility[i] = count;
  }

  const double vr2 = visit_radius * visit_radius;
  for (int i = 0; i < n; ++i) {
    for (const Coord p : path) {
      if (static_cast<double>(dist2(g.nodes[i], p)) <= vr2) {
        g.guidepost[i] = 1;
        break;
      }
    }
  }
  return g;
}

GroundTruthGraph build_ground_truth_graph(const GroundTruthMap& gt, const BeliefMap& belief,
                                          const std::vector<Coord>& path, int lattice_dim, int k,
                                          int sensor_range, const InformativeGraph* informative) {
  GroundTruthGraph g;
  std::unordered_map<Coord, int, CoordHash> index;
  for (const Coord p : lattice_points(gt.width(), gt.height(), lattice_dim)) {
    if (gt.free_at(p) && !index.count(p)) {
      index.emplace(p, static_cast<int>(g.nodes.size()));
      g.nodes.push_back(p);
    }
  }
  for (const Coord p : path) {
    if (gt.free_at(p) && !index.count(p)) {
      index.emplace(p, static_cast<int>(g.nodes.size()));
      g.nodes.push_back(p);
    }
  }
  const int n = g.node_count();
  g.adj = knn_los_edges(g.nodes, k, [&](Coord a, Coord b) { return line_of_sight(gt, a, b); });
  if (!path.empty()) {
    const auto it = index.find(path.back());
    g.current_index = it == index.end() ? -1 : it->second;
  }

  g.explored.assign(n, 0);
  g.utility.assign(n, -1.0);

  std::unordered_map<Coord, int, CoordHash> info_index;
  std::vector<Coord> frontiers;
  if (informative) {
    for (int i = 0; i < informative->node_count(); ++i) {
      info_index.emplace(informative->nodes[i], i);
    }
  } else {
    frontiers = detect_frontiers(belief);
  }

  const int64_t r2 = static_cast<int64_t>(sensor_range) * sensor_range;
  for (int i = 0; i < n; ++i) {
    if (belief.at(g.nodes[i]) == Cell::Unknown) continue;
    g.explored[i] = 1;
    if (informative) {
      // Explored ground-truth nodes are belief-Free, so they exist in the
      // informative graph built from the same belief and path.
      const auto it = info_index.find(g.nodes[i]);
      assert(it != info_index.end());
      g.utility[i] = it == info_index.end() ? 0.0 : informative->utility[it->second];
    } else {
      int count = 0;
      for (const Coord f : frontiers) {
        if (dist2(g.nodes[i], f) > r2) continue;
        if (line_of_sight(belief, g.nodes[i], f)) ++count;
      }
      g.utility[i] = count;
    }
  }
  return g;
}

std::optional<PathResult> astar(const std::vector<Coord>& nodes,
                                const std::vector<std::vector<int>>& adj, int from, int to) {
  assert(from >= 0 && from < static_cast<int>(nodes.size()));
  assert(to >= 0 && to < static_cast<int>(nodes.size()));
  const int n = static_cast<int>(nodes.size());
  std::vector<double> g_cost(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<uint8_t> closed(n, 0);

  using Entry = std::pair<double, int>;  // (f, node); ties -> smaller index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g_cost[from] = 0.0;
  open.emplace(distance(nodes[from], nodes[to]), from);

  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    if (u == to) break;
    for (const int v : adj[u]) {
      if (closed[v]) continue;
      const double cand = g_cost[u] + distance(nodes[u], nodes[v]);
      if (cand < g_cost[v]) {
        g_cost[v] = cand;
        parent[v] = u;
        open.emplace(cand + distance(nodes[v], nodes[to]), v);
      }
    }
  }

  if (!closed[to]) return std::nullopt;
  PathResult result;
  result.cost = g_cost[to];
  for (int v = to; v != -1; v = parent[v]) result.nodes.push_back(v);
  std::reverse(result.nodes.begin(), result.nodes.end());
  return result;
}

void dump_graph(const InformativeGraph& graph, std::ostream& out) {
  for (int i = 0; i < graph.node_count(); ++i) {
    out << "node " << i << ' ' << graph.nodes[i].x << ' ' << graph.nodes[i].y << ' '
        << static_cast<long long>(graph.utility[i]) << ' ' << static_cast<int>(graph.guidepost[i])
        << '\n';
  }
  for (int i = 0; i < graph.node_count(); ++i) {
    for (const int j : graph.adj[i]) {
      if (i < j) out << "edge " << i << ' ' << j << '\n';
    }
  }
}

}  // namespace explorer
