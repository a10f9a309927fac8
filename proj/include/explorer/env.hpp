#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "explorer/graph.hpp"
#include "explorer/grid.hpp"
#include "explorer/rng.hpp"

namespace explorer {

enum class CompletionMode { ZeroUtility, Coverage99 };

struct EnvConfig {
  int sensor_range = 80;
  int lattice_dim = 30;
  int knn = 20;
  double utility_threshold = 5.0;  // nodes with u <= threshold count as exhausted
  CompletionMode completion = CompletionMode::ZeroUtility;
  double visit_radius = 0.0;  // guidepost radius; 0 -> one lattice spacing
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  int newly_observed_frontiers = 0;
  double path_cost = 0.0;  // cells traveled by this step
};

// Reward shaping constants: r = cost/64 + frontiers/50 + 20 on completion.
inline constexpr double kCostScale = 1.0 / 64.0;
inline constexpr double kFrontierScale = 1.0 / 50.0;
inline constexpr double kFinishReward = 20.0;

// Exact integer threshold: belief covers >= 99% of the true free area.
inline bool coverage99_reached(size_t belief_free, size_t gt_free) {
  return 100 * belief_free >= 99 * gt_free;
}

// One exploration episode over a ground-truth map: belief updates from
// raycasts, informative/ground-truth graph maintenance, reward shaping.
// Instances are independent; the ground-truth map is shared read-only.
class Environment {
 public:
  Environment(std::shared_ptr<const GroundTruthMap> gt, EnvConfig config);

  void reset(Coord start);
  void reset_random(Rng& rng);

  // Moves along the edge to the given graph node, senses, recomputes graphs.
  // Throws std::invalid_argument unless target is a neighbor of the current
  // node in the informative graph.
  StepOutcome step(int target_node);

  bool is_complete(CompletionMode mode) const;
  double coverage() const;

  const GroundTruthMap& ground_truth() const { return *gt_; }
  const BeliefMap& belief() const { return belief_; }
  const std::vector<Coord>& path() const { return path_; }
  Coord position() const { return path_.back(); }
  const std::vector<Coord>& frontiers() const { return frontiers_; }

  const InformativeGraph& graph() const { return *graph_; }
  const GroundTruthGraph& ground_truth_graph() const { return *gt_graph_; }
  std::shared_ptr<const InformativeGraph> graph_ptr() const { return graph_; }
  std::shared_ptr<const GroundTruthGraph> ground_truth_graph_ptr() const { return gt_graph_; }

  // Index of a position in the ground-truth graph (-1 when absent).
  int gt_node_index(Coord c) const;

  int steps() const { return steps_; }
  double total_distance() const { return total_distance_; }
  const EnvConfig& config() const { return config_; }

 private:
  void rebuild_graphs();

  std::shared_ptr<const GroundTruthMap> gt_;
  EnvConfig config_;
  double visit_radius_ = 0.0;

  BeliefMap belief_;
  std::vector<Coord> path_;
  std::vector<uint8_t> frontier_seen_;  // per-cell first-observation flags
  std::vector<Coord> frontiers_;

  std::shared_ptr<const InformativeGraph> graph_;
  std::shared_ptr<const GroundTruthGraph> gt_graph_;

  // Static per-episode part of the ground-truth graph.
  std::vector<Coord> gt_nodes_;
  std::vector<std::vector<int>> gt_adj_;
  std::unordered_map<int64_t, int> gt_index_;

  int steps_ = 0;
  double total_distance_ = 0.0;
};

}  // namespace explorer
