#include "explorer/baselines.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>

namespace explorer {

namespace {

// Single-source shortest paths (Euclidean edge costs), lowest-index ties.
void dijkstra_all(const std::vector<Coord>& nodes, const std::vector<std::vector<int>>& adj,
                  int src, std::vector<double>& dist, std::vector<int>& parent) {
  const int n = static_cast<int>(nodes.size());
  dist.assign(n, std::numeric_limits<double>::infinity());
  parent.assign(n, -1);
  std::vector<uint8_t> done(n, 0);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[src] = 0.0;
  open.emplace(0.0, src);
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const int v : adj[u]) {
      if (done[v]) continue;
      const double cand = dist[u] + distance(nodes[u], nodes[v]);
      if (cand < dist[v]) {
        dist[v] = cand;
        parent[v] = u;
        open.emplace(cand, v);
      }
    }
  }
}

std::vector<int> extract_path(const std::vector<int>& parent, int target) {
  std::vector<int> path;
  for (int v = target; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

PlannerDecision nearest_frontier(const InformativeGraph& g, double utility_threshold,
                                 bool exclude_visited) {
  std::vector<double> dist;
  std::vector<int> parent;
  dijkstra_all(g.nodes, g.adj, g.current_index, dist, parent);

  PlannerDecision out;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.utility[i] <= utility_threshold || i == g.current_index) continue;
    if (exclude_visited && g.guidepost[i]) continue;
    if (dist[i] < best) {
      best = dist[i];
      out.target = i;
    }
  }
  if (out.target >= 0) {
    out.score = best;
    out.path = extract_path(parent, out.target);
  }
  return out;
}

PlannerDecision utility_frontier(const InformativeGraph& g, double lambda,
                                 double utility_threshold, bool exclude_visited) {
  std::vector<double> dist;
  std::vector<int> parent;
  dijkstra_all(g.nodes, g.adj, g.current_index, dist, parent);

  PlannerDecision out;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.utility[i] <= utility_threshold || i == g.current_index) continue;
    if (exclude_visited && g.guidepost[i]) continue;
    if (std::isinf(dist[i])) continue;
    const double score = g.utility[i] * std::exp(-lambda * dist[i]);
    if (score > best) {
      best = score;
      out.target = i;
    }
  }
  if (out.target >= 0) {
    out.score = best;
    out.path = extract_path(parent, out.target);
  }
  return out;
}

PlannerDecision random_walker(const InformativeGraph& g, Rng& rng) {
  const auto& nbrs = g.adj[g.current_index];
  assert(!nbrs.empty());
  PlannerDecision out;
  out.target = nbrs[rng.uniform_int(static_cast<int>(nbrs.size()))];
  out.path = {g.current_index, out.target};
  out.score = 1.0 / static_cast<double>(nbrs.size());
  return out;
}

double default_utility_lambda(double spacing) { return std::log(2.0) / (20.0 * spacing); }

}  // namespace explorer
