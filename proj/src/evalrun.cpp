#include "explorer/evalrun.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "explorer/baselines.hpp"
#include "explorer/parallel.hpp"
#include "explorer/rarefy.hpp"
#include "explorer/rollout.hpp"

namespace explorer {

PlannerKind planner_from_string(const std::string& name) {
  if (name == "drl") return PlannerKind::Drl;
  if (name == "nearest") return PlannerKind::Nearest;
  if (name == "utility") return PlannerKind::Utility;
  if (name == "random") return PlannerKind::Random;
  throw std::runtime_error("unknown planner: " + name);
}

std::string planner_name(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Drl: return "drl";
    case PlannerKind::Nearest: return "nearest";
    case PlannerKind::Utility: return "utility";
    case PlannerKind::Random: return "random";
  }
  return "?";
}

namespace {

struct EpisodeLogData {
  const BeliefMap* belief = nullptr;
  std::vector<Coord> trajectory;
  AttentionDump attention;  // last decision's decoder weights
  std::vector<Coord> attention_nodes;
};

void write_episode_log(const std::string& path, const EpisodeLogData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write episode log: " + path);
  const BeliefMap& b = *data.belief;
  out << "map " << b.width() << ' ' << b.height() << '\n';
  out << "belief\n";
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      const Cell c = b.at(x, y);
      out << (c == Cell::Free ? '.' : c == Cell::Occupied ? '#' : '?');
    }
    out << '\n';
  }
  out << "trajectory " << data.trajectory.size() << '\n';
  for (const Coord c : data.trajectory) out << c.x << ' ' << c.y << '\n';
  if (!data.attention.empty()) {
    out << "attention " << data.attention.size() << ' ' << data.attention_nodes.size() << '\n';
    for (size_t i = 0; i < data.attention_nodes.size(); ++i) {
      out << data.attention_nodes[i].x << ' ' << data.attention_nodes[i].y;
      for (const Matrix& head : data.attention) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", head(0, static_cast<int>(i)));
        out << ' ' << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace

std::vector<EvalRecord> run_eval(PlannerKind kind, const std::vector<GroundTruthMap>& maps,
                                 const RunConfig& config, const NetworkParams* policy,
                                 const std::optional<EpisodeLogRequest>& log) {
  if (kind == PlannerKind::Drl && !policy) {
    throw std::runtime_error("drl evaluation requires a checkpoint");
  }
  const CompletionMode completion = config.eval_completion == "zero_utility"
                                        ? CompletionMode::ZeroUtility
                                        : CompletionMode::Coverage99;
  const double unorm = config.resolved_utility_norm();
  const int threads = config.threads > 0 ? config.threads : default_thread_count();
  if (log) std::filesystem::create_directories(log->directory);

  std::vector<EvalRecord> records(maps.size());
  parallel_for(static_cast<int>(maps.size()), threads, [&](int mi) {
    const GroundTruthMap& map = maps[mi];
    EnvConfig env_cfg = config.env_config();
    env_cfg.completion = completion;
    Environment env(std::make_shared<GroundTruthMap>(map), env_cfg);
    // Paired starts: derived from the map seed only, identical across planners.
    Rng start_rng(mix_seed(map.seed(), 0x57A7));
    env.reset_random(start_rng);
    Rng action_rng(mix_seed(map.seed(), 0xAC7104));

    const double spacing = lattice_spacing(map.width(), map.height(), config.lattice_dim);
    const double lambda =
        config.utility_lambda > 0.0 ? config.utility_lambda : default_utility_lambda(spacing);
    const double d_th = config.d_th_lattice * spacing;

    EpisodeLogData log_data;
    int decisions = 0;
    double decision_seconds = 0.0;
    bool stuck = false;
    while (!env.is_complete(completion) && decisions < config.eval_episode_cap && !stuck) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<int> walk;  // node sequence after the current node
      const InformativeGraph& g = env.graph();
      switch (kind) {
        case PlannerKind::Drl: {
          if (config.rarefy) {
            const SparseGraph sparse = rarefy(g, env.belief(), d_th, config.sparse_knn);
            const FeatureGraph fg = make_policy_input(sparse.graph, unorm);
            if (fg.neighbors.empty()) {
              stuck = true;
              break;
            }
            AttentionDump* dump = log && log->dump_attention ? &log_data.attention : nullptr;
            const Matrix probs = policy_probabilities(*policy, fg, dump);
            if (dump) log_data.attention_nodes = sparse.graph.nodes;
            const int action = select_action(probs, action_rng, /*argmax=*/true);
            const int dense_target = sparse.original_index[fg.neighbors[action]];
            const auto path = astar(g.nodes, g.adj, g.current_index, dense_target);
            if (!path) {
              stuck = true;
              break;
            }
            walk.assign(path->nodes.begin() + 1, path->nodes.end());
          } else {
            const FeatureGraph fg = make_policy_input(g, unorm);
            if (fg.neighbors.empty()) {
              stuck = true;
              break;
            }
            AttentionDump* dump = log && log->dump_attention ? &log_data.attention : nullptr;
            const Matrix probs = policy_probabilities(*policy, fg, dump);
            if (dump) log_data.attention_nodes = g.nodes;
            const int action = select_action(probs, action_rng, /*argmax=*/true);
            walk.push_back(fg.neighbors[action]);
          }
          break;
        }
        case PlannerKind::Nearest: {
          // Tiered target choice: unvisited nodes above the
          // ignore-threshold, then any unvisited informative node (openings
          // seen through a narrow aperture), then already-visited ones.
          PlannerDecision d =
              nearest_frontier(g, config.planner_utility_threshold, /*exclude_visited=*/true);
          if (!d.valid()) d = nearest_frontier(g, 0.0, /*exclude_visited=*/true);
          if (!d.valid()) d = nearest_frontier(g, 0.0);
          if (!d.valid()) {
            stuck = true;
            break;
          }
          walk.assign(d.path.begin() + 1, d.path.end());
          break;
        }
        case PlannerKind::Utility: {
          PlannerDecision d = utility_frontier(g, lambda, config.planner_utility_threshold,
                                               /*exclude_visited=*/true);
          if (!d.valid()) d = utility_frontier(g, lambda, 0.0, /*exclude_visited=*/true);
          if (!d.valid()) d = utility_frontier(g, lambda, 0.0);
          if (!d.valid()) {
            stuck = true;
            break;
          }
          walk.assign(d.path.begin() + 1, d.path.end());
          break;
        }
        case PlannerKind::Random: {
          if (g.adj[g.current_index].empty()) {
            stuck = true;
            break;
          }
          const PlannerDecision d = random_walker(g, action_rng);
          walk.push_back(d.target);
          break;
        }
      }
      decision_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (stuck) break;
      ++decisions;

      // The walk re-resolves each hop by position: the graph is rebuilt after
      // every step and node indices shift as the belief grows.
      std::vector<Coord> walk_cells;
      walk_cells.reserve(walk.size());
      for (const int node : walk) walk_cells.push_back(env.graph().nodes[node]);
      for (const Coord cell : walk_cells) {
        const InformativeGraph& now = env.graph();
        int node = -1;
        for (const int nb : now.adj[now.current_index]) {
          if (now.nodes[nb] == cell) {
            node = nb;
            break;
          }
        }
        if (node < 0) break;  // edge vanished after re-extraction
        const StepOutcome out = env.step(node);
        if (out.done || env.is_complete(completion)) break;
      }
    }

    EvalRecord rec;
    rec.planner = planner_name(kind);
    rec.map_seed = map.seed();
    rec.distance = env.total_distance();
    rec.decisions = decisions;
    rec.coverage = env.coverage();
    rec.ms_per_decision = decisions > 0 ? 1e3 * decision_seconds / decisions : 0.0;
    records[mi] = rec;

    if (log) {
      log_data.belief = &env.belief();
      log_data.trajectory = env.path();
      char name[48];
      std::snprintf(name, sizeof(name), "episode_%s_%llu.log", rec.planner.c_str(),
                    static_cast<unsigned long long>(map.seed()));
      write_episode_log(log->directory + "/" + name, log_data);
    }
  });
  return records;
}

EvalSummary summarize(const std::vector<EvalRecord>& records) {
  EvalSummary s;
  s.total = static_cast<int>(records.size());
  if (records.empty()) return s;
  for (const EvalRecord& r : records) {
    s.mean_distance += r.distance;
    if (r.coverage >= 0.99) ++s.completed;
  }
  s.mean_distance /= s.total;
  double var = 0.0;
  for (const EvalRecord& r : records) {
    var += (r.distance - s.mean_distance) * (r.distance - s.mean_distance);
  }
  s.std_distance = std::sqrt(var / s.total);
  return s;
}

std::string EvalSummary::distance_cell() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.0f(±%.0f)", mean_distance, std_distance);
  return buf;
}

void write_eval_csv(const std::vector<EvalRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write eval csv: " + path);
  out << "planner,map_seed,distance,decisions,coverage\n";
  char buf[64];
  for (const EvalRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g", r.distance, r.decisions, r.coverage);
    out << r.planner << ',' << r.map_seed << ',' << buf << '\n';
  }
  std::ofstream timing(path + ".timing.csv", std::ios::binary);
  if (!timing) throw std::runtime_error("cannot write timing csv: " + path + ".timing.csv");
  timing << "planner,map_seed,ms_per_decision\n";
  for (const EvalRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.6g", r.ms_per_decision);
    timing << r.planner << ',' << r.map_seed << ',' << buf << '\n';
  }
}

}  // namespace explorer
