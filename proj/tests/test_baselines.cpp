#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "explorer/baselines.hpp"
#include "explorer/env.hpp"
#include "explorer/rng.hpp"
#include "oracles.hpp"

using namespace explorer;

namespace {

InformativeGraph line_graph(std::vector<double> utilities) {
  InformativeGraph g;
  const int n = static_cast<int>(utilities.size());
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back({5 * i, 0});
    g.guidepost.push_back(i == 0);
  }
  g.utility = std::move(utilities);
  g.adj.assign(n, {});
  for (int i = 0; i + 1 < n; ++i) {
    g.adj[i].push_back(i + 1);
    g.adj[i + 1].push_back(i);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  g.current_index = 0;
  return g;
}

InformativeGraph random_graph(Rng& rng, int n) {
  InformativeGraph g;
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back({rng.uniform_int(80), rng.uniform_int(80)});
    g.utility.push_back(rng.bernoulli(0.3) ? rng.uniform_int(20) : 0.0);
    g.guidepost.push_back(0);
  }
  g.adj.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(0.2)) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
    }
  }
  g.current_index = rng.uniform_int(n);
  return g;
}

}  // namespace

TEST_CASE("nearest frontier basics") {
  SUBCASE("single utility node is chosen") {
    const auto g = line_graph({0, 0, 4, 0});
    const PlannerDecision d = nearest_frontier(g);
    CHECK(d.target == 2);
    CHECK(d.path == std::vector<int>{0, 1, 2});
    CHECK(d.score == doctest::Approx(10.0));
  }
  SUBCASE("cheaper of two utility nodes wins") {
    const auto g = line_graph({0, 6, 0, 9, 0});
    CHECK(nearest_frontier(g).target == 1);
  }
  SUBCASE("no utility nodes -> no decision") {
    const auto g = line_graph({0, 0, 0});
    CHECK_FALSE(nearest_frontier(g).valid());
  }
}

TEST_CASE("nearest frontier equals the exhaustive argmin oracle") {
  Rng rng(401);
  for (int trial = 0; trial < 80; ++trial) {
    const InformativeGraph g = random_graph(rng, 3 + rng.uniform_int(25));
    const PlannerDecision d = nearest_frontier(g);
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.node_count(); ++i) {
      if (g.utility[i] <= 0.0 || i == g.current_index) continue;
      const auto cost = oracle::dijkstra_cost(g.nodes, g.adj, g.current_index, i);
      if (cost && *cost < best_cost) {
        best_cost = *cost;
        best = i;
      }
    }
    CHECK(d.target == best);
    if (best >= 0) CHECK(d.score == *oracle::dijkstra_cost(g.nodes, g.adj, g.current_index, best));
  }
}

TEST_CASE("utility frontier properties") {
  SUBCASE("equal utilities reduce to the nearest choice") {
    const auto g = line_graph({0, 0, 7, 0, 7});
    const PlannerDecision nearest = nearest_frontier(g);
    const PlannerDecision util = utility_frontier(g, 0.05);
    CHECK(util.target == nearest.target);
  }
  SUBCASE("lambda = 0 picks the max-utility node") {
    const auto g = line_graph({0, 3, 0, 11, 2});
    CHECK(utility_frontier(g, 0.0).target == 3);
  }
}

TEST_CASE("utility frontier equals the exhaustive argmax oracle") {
  Rng rng(402);
  for (int trial = 0; trial < 80; ++trial) {
    const InformativeGraph g = random_graph(rng, 3 + rng.uniform_int(25));
    const double lambda = rng.uniform(0.0, 0.3);
    const PlannerDecision d = utility_frontier(g, lambda);
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.node_count(); ++i) {
      if (g.utility[i] <= 0.0 || i == g.current_index) continue;
      const auto cost = oracle::dijkstra_cost(g.nodes, g.adj, g.current_index, i);
      if (!cost) continue;
      const double score = g.utility[i] * std::exp(-lambda * *cost);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    CHECK(d.target == best);
  }
}

TEST_CASE("random walker: single neighbor, seeded reproducibility, frequencies") {
  const auto g = line_graph({0, 0, 0});
  SUBCASE("one neighbor -> that neighbor") {
    Rng rng(1);
    CHECK(random_walker(g, rng).target == 1);
  }
  SUBCASE("seeded rng reproduces the sequence") {
    InformativeGraph h = line_graph({0, 0, 0, 0});
    h.current_index = 1;  // neighbors 0 and 2
    Rng a(5), b(5);
    for (int i = 0; i < 50; ++i) {
      CHECK(random_walker(h, a).target == random_walker(h, b).target);
    }
  }
  SUBCASE("empirical frequencies within 3 sigma of uniform") {
    InformativeGraph h;
    h.nodes = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    h.utility = {0, 0, 0, 0, 0};
    h.guidepost = {0, 0, 0, 0, 0};
    h.adj = {{1, 2, 3, 4}, {0}, {0}, {0}, {0}};
    h.current_index = 0;
    Rng rng(9);
    const int draws = 10000;
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < draws; ++i) ++counts[random_walker(h, rng).target];
    const double expect = draws / 4.0;
    const double sigma = std::sqrt(draws * 0.25 * 0.75);
    for (int t = 1; t <= 4; ++t) {
      CHECK(std::abs(counts[t] - expect) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("default utility lambda halves the score every 20 spacings") {
  const double spacing = 4.0;
  const double lambda = default_utility_lambda(spacing);
  CHECK(std::exp(-lambda * 20.0 * spacing) == doctest::Approx(0.5).epsilon(1e-12));
}
