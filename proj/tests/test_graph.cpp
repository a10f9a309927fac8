#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "explorer/graph.hpp"
#include "explorer/rng.hpp"
#include "explorer/visibility.hpp"
#include "oracles.hpp"

using namespace explorer;

namespace {

BeliefMap fully_revealed(const GroundTruthMap& m) {
  BeliefMap b(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) b.set(x, y, m.at(x, y));
  }
  return b;
}

BeliefMap random_belief(Rng& rng, int w, int h) {
  BeliefMap b(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = rng.uniform();
      b.set(x, y, u < 0.5 ? Cell::Free : u < 0.7 ? Cell::Occupied : Cell::Unknown);
    }
  }
  return b;
}

Coord any_free(const BeliefMap& b) {
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      if (b.at(x, y) == Cell::Free) return {x, y};
    }
  }
  return {-1, -1};
}

}  // namespace

TEST_CASE("lattice points are unique and cover the extent") {
  const auto pts = lattice_points(640, 480, 30);
  CHECK(pts.size() == 900);
  CHECK(pts.front() == Coord{0, 0});
  CHECK(pts.back() == Coord{639, 479});
  auto sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("open map: all lattice nodes present with edges") {
  GroundTruthMap m(64, 64, 0);
  for (int y = 1; y < 63; ++y) {
    for (int x = 1; x < 63; ++x) m.set(x, y, Cell::Free);
  }
  const BeliefMap belief = fully_revealed(m);
  // 30x30 lattice over 64x64: interior points are free; border points occupied.
  const CollisionGraph g = extract_collision_graph(belief, {32, 32}, {}, 30, 20);
  int expected_nodes = 0;
  for (const Coord p : lattice_points(64, 64, 30)) {
    if (belief.free_at(p)) ++expected_nodes;
  }
  CHECK(g.node_count() >= expected_nodes);
  CHECK(g.robot_index >= 0);
  CHECK(g.nodes[g.robot_index] == Coord{32, 32});
  int with_enough = 0;
  for (const auto& a : g.adj) {
    if (static_cast<int>(a.size()) >= 10) ++with_enough;
  }
  CHECK(with_enough > g.node_count() * 9 / 10);
}

TEST_CASE("belief limited to a disc keeps nodes inside the disc") {
  const GroundTruthMap m = generate_map(11, 96, 64);
  BeliefMap belief(96, 64);
  Coord pos{-1, -1};
  for (int y = 0; y < 64 && pos.x < 0; ++y) {
    for (int x = 0; x < 96; ++x) {
      if (m.at(x, y) == Cell::Free) {
        pos = {x, y};
        break;
      }
    }
  }
  raycast_update(m, belief, pos, 12);
  const CollisionGraph g = extract_collision_graph(belief, pos, {}, 30, 20);
  for (const Coord n : g.nodes) {
    CHECK(distance(n, pos) <= 12.0 + 1e-9);
  }
}

TEST_CASE("every emitted edge passes line of sight; no passing candidate omitted") {
  Rng rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    const BeliefMap belief = random_belief(rng, 48, 48);
    const Coord robot = any_free(belief);
    if (robot.x < 0) continue;
    const int k = 6;
    const CollisionGraph g = extract_collision_graph(belief, robot, {}, 12, k);
    const int n = g.node_count();
    for (int i = 0; i < n; ++i) {
      for (const int j : g.adj[i]) {
        CHECK(oracle::line_of_sight(belief, g.nodes[i], g.nodes[j]));
      }
    }
    // Exhaustive candidate check: for each node, its k nearest candidates
    // that pass line of sight must all be edges.
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int64_t, int>> cand;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int64_t dx = g.nodes[i].x - g.nodes[j].x;
        const int64_t dy = g.nodes[i].y - g.nodes[j].y;
        cand.emplace_back(dx * dx + dy * dy, j);
      }
      std::sort(cand.begin(), cand.end());
      const int take = std::min<int>(k, static_cast<int>(cand.size()));
      for (int c = 0; c < take; ++c) {
        const int j = cand[c].second;
        if (oracle::line_of_sight(belief, g.nodes[i], g.nodes[j])) {
          CHECK(std::binary_search(g.adj[i].begin(), g.adj[i].end(), j));
        }
      }
    }
  }
}

TEST_CASE("utilities: no frontiers -> all zero; adjacent frontier counts") {
  GroundTruthMap m(34, 34, 0);
  for (int y = 1; y < 33; ++y) {
    for (int x = 1; x < 33; ++x) m.set(x, y, Cell::Free);
  }
  BeliefMap belief = fully_revealed(m);
  const CollisionGraph g = extract_collision_graph(belief, {16, 16}, {}, 8, 6);
  SUBCASE("fully known map has no frontiers") {
    const auto frontiers = detect_frontiers(belief);
    CHECK(frontiers.empty());
    const InformativeGraph ig = compute_utilities(g, belief, frontiers, 10, {{16, 16}}, 3.0);
    for (const double u : ig.utility) CHECK(u == 0.0);
  }
  SUBCASE("one visible frontier yields utility 1") {
    belief.set(17, 16, Cell::Unknown);
    const auto frontiers = detect_frontiers(belief);
    const InformativeGraph ig = compute_utilities(g, belief, frontiers, 40, {{16, 16}}, 3.0);
    bool any = false;
    for (int i = 0; i < ig.node_count(); ++i) {
      if (ig.nodes[i] == Coord{16, 16}) continue;
      if (ig.utility[i] > 0) any = true;
    }
    CHECK(any);
  }
}

TEST_CASE("utilities equal the brute-force oracle on random beliefs") {
  Rng rng(302);
  for (int trial = 0; trial < 12; ++trial) {
    const BeliefMap belief = random_belief(rng, 40, 40);
    const Coord robot = any_free(belief);
    if (robot.x < 0) continue;
    const CollisionGraph g = extract_collision_graph(belief, robot, {}, 10, 5);
    const auto frontiers = detect_frontiers(belief);
    const int range = 9;
    const InformativeGraph ig = compute_utilities(g, belief, frontiers, range, {robot}, 2.0);
    for (int i = 0; i < ig.node_count(); ++i) {
      int count = 0;
      for (const Coord f : frontiers) {
        const int64_t dx = f.x - ig.nodes[i].x, dy = f.y - ig.nodes[i].y;
        if (dx * dx + dy * dy > static_cast<int64_t>(range) * range) continue;
        if (oracle::line_of_sight(belief, ig.nodes[i], f)) ++count;
      }
      REQUIRE(ig.utility[i] == static_cast<double>(count));
    }
  }
}

TEST_CASE("guidepost marks nodes near the executed path") {
  GroundTruthMap m(40, 40, 0);
  for (int y = 1; y < 39; ++y) {
    for (int x = 1; x < 39; ++x) m.set(x, y, Cell::Free);
  }
  const BeliefMap belief = fully_revealed(m);
  const CollisionGraph g = extract_collision_graph(belief, {20, 20}, {}, 10, 5);
  const std::vector<Coord> path{{20, 20}, {10, 10}};
  const InformativeGraph ig = compute_utilities(g, belief, {}, 10, path, 3.0);
  for (int i = 0; i < ig.node_count(); ++i) {
    const bool near = distance(ig.nodes[i], path[0]) <= 3.0 || distance(ig.nodes[i], path[1]) <= 3.0;
    CHECK(static_cast<bool>(ig.guidepost[i]) == near);
  }
}

TEST_CASE("ground-truth graph features") {
  const GroundTruthMap m = generate_map(13, 72, 56);
  SUBCASE("fully revealed: all explored, no -1 utility") {
    const BeliefMap belief = fully_revealed(m);
    Coord start = any_free(belief);
    const GroundTruthGraph g = build_ground_truth_graph(m, belief, {start}, 12, 6, 20);
    CHECK(g.node_count() > 0);
    for (int i = 0; i < g.node_count(); ++i) {
      CHECK(g.explored[i] == 1);
      CHECK(g.utility[i] >= 0.0);
    }
  }
  SUBCASE("all-unknown belief: all unexplored, utility -1") {
    BeliefMap belief(72, 56);
    const GroundTruthGraph g = build_ground_truth_graph(m, belief, {}, 12, 6, 20);
    for (int i = 0; i < g.node_count(); ++i) {
      CHECK(g.explored[i] == 0);
      CHECK(g.utility[i] == -1.0);
    }
  }
  SUBCASE("mid-episode: node superset and explored positions match informative graph") {
    BeliefMap belief(72, 56);
    Coord start{-1, -1};
    for (int y = 0; y < 56 && start.x < 0; ++y) {
      for (int x = 0; x < 72; ++x) {
        if (m.at(x, y) == Cell::Free) {
          start = {x, y};
          break;
        }
      }
    }
    raycast_update(m, belief, start, 18);
    const CollisionGraph cg = extract_collision_graph(belief, start, {start}, 12, 6);
    const auto frontiers = detect_frontiers(belief);
    const InformativeGraph ig = compute_utilities(cg, belief, frontiers, 18, {start}, 3.0);
    const GroundTruthGraph gg = build_ground_truth_graph(m, belief, {start}, 12, 6, 18, &ig);
    CHECK(gg.node_count() >= ig.node_count());
    // Explored ground-truth nodes appear in the informative graph with equal
    // utility (its nodes are exactly the belief-free lattice + path cells).
    for (int i = 0; i < gg.node_count(); ++i) {
      if (!gg.explored[i]) {
        CHECK(gg.utility[i] == -1.0);
        continue;
      }
      const auto it = std::find(ig.nodes.begin(), ig.nodes.end(), gg.nodes[i]);
      REQUIRE(it != ig.nodes.end());
      CHECK(gg.utility[i] == ig.utility[it - ig.nodes.begin()]);
    }
  }
}

TEST_CASE("astar trivial cases") {
  const std::vector<Coord> nodes{{0, 0}, {3, 0}, {6, 0}};
  const std::vector<std::vector<int>> adj{{1}, {0, 2}, {1}};
  SUBCASE("from == to") {
    const auto r = astar(nodes, adj, 1, 1);
    REQUIRE(r.has_value());
    CHECK(r->nodes == std::vector<int>{1});
    CHECK(r->cost == 0.0);
  }
  SUBCASE("line graph goes through the middle") {
    const auto r = astar(nodes, adj, 0, 2);
    REQUIRE(r.has_value());
    CHECK(r->nodes == std::vector<int>{0, 1, 2});
    CHECK(r->cost == doctest::Approx(6.0));
  }
  SUBCASE("unreachable yields no path") {
    const std::vector<std::vector<int>> cut{{}, {2}, {1}};
    CHECK_FALSE(astar(nodes, cut, 0, 2).has_value());
  }
}

TEST_CASE("astar cost equals the Dijkstra oracle on 200 random graphs") {
  Rng rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.uniform_int(40);
    std::vector<Coord> nodes(n);
    for (auto& c : nodes) c = {rng.uniform_int(100), rng.uniform_int(100)};
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.bernoulli(0.15)) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      }
    }
    const int from = rng.uniform_int(n);
    const int to = rng.uniform_int(n);
    const auto got = astar(nodes, adj, from, to);
    const auto expected = oracle::dijkstra_cost(nodes, adj, from, to);
    REQUIRE(got.has_value() == expected.has_value());
    if (got) {
      CHECK(got->cost == *expected);
      // Path is contiguous in the graph and its edge lengths sum to cost.
      double sum = 0.0;
      for (size_t s = 0; s + 1 < got->nodes.size(); ++s) {
        const int u = got->nodes[s], v = got->nodes[s + 1];
        CHECK(std::binary_search(adj[u].begin(), adj[u].end(), v));
        sum += distance(nodes[u], nodes[v]);
      }
      CHECK(sum == doctest::Approx(got->cost).epsilon(1e-12));
    }
  }
}

TEST_CASE("graph dump golden format") {
  InformativeGraph g;
  g.nodes = {{0, 0}, {4, 0}, {4, 3}};
  g.utility = {0.0, 7.0, 2.0};
  g.guidepost = {1, 0, 0};
  g.adj = {{1}, {0, 2}, {1}};
  g.current_index = 0;
  std::ostringstream out;
  dump_graph(g, out);
  CHECK(out.str() ==
        "node 0 0 0 0 1\n"
        "node 1 4 0 7 0\n"
        "node 2 4 3 2 0\n"
        "edge 0 1\n"
        "edge 1 2\n");
}
