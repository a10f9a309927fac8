#include "explorer/env.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "explorer/visibility.hpp"

namespace explorer {

namespace {
int64_t coord_key(Coord c) { return (static_cast<int64_t>(c.x) << 32) | static_cast<uint32_t>(c.y); }
}  // namespace

Environment::Environment(std::shared_ptr<const GroundTruthMap> gt, EnvConfig config)
    : gt_(std::move(gt)), config_(config) {
  visit_radius_ = config_.visit_radius > 0.0
                      ? config_.visit_radius
                      : lattice_spacing(gt_->width(), gt_->height(), config_.lattice_dim);
}

void Environment::reset(Coord start) {
  if (!gt_->in_bounds(start.x, start.y) || !gt_->free_at(start)) {
    throw std::invalid_argument("reset: start cell is not free in ground truth");
  }
  belief_ = BeliefMap(gt_->width(), gt_->height());
  path_.assign(1, start);
  frontier_seen_.assign(static_cast<size_t>(gt_->width()) * gt_->height(), 0);
  steps_ = 0;
  total_distance_ = 0.0;

  // Static ground-truth graph part: every robot position is either a lattice
  // node or the start cell, so the node set never grows mid-episode.
  gt_nodes_.clear();
  gt_index_.clear();
  for (const Coord p : lattice_points(gt_->width(), gt_->height(), config_.lattice_dim)) {
    if (gt_->free_at(p) && !gt_index_.count(coord_key(p))) {
      gt_index_.emplace(coord_key(p), static_cast<int>(gt_nodes_.size()));
      gt_nodes_.push_back(p);
    }
  }
  if (!gt_index_.count(coord_key(start))) {
    gt_index_.emplace(coord_key(start), static_cast<int>(gt_nodes_.size()));
    gt_nodes_.push_back(start);
  }
  gt_adj_ = knn_los_edges(gt_nodes_, config_.knn,
                          [&](Coord a, Coord b) { return line_of_sight(*gt_, a, b); });

  raycast_update(*gt_, belief_, start, config_.sensor_range);
  rebuild_graphs();
  for (const Coord f : frontiers_) {
    frontier_seen_[static_cast<size_t>(f.y) * gt_->width() + f.x] = 1;
  }
}

void Environment::reset_random(Rng& rng) {
  std::vector<Coord> free_cells;
  free_cells.reserve(gt_->free_count());
  for (int y = 0; y < gt_->height(); ++y) {
    for (int x = 0; x < gt_->width(); ++x) {
      if (gt_->at(x, y) == Cell::Free) free_cells.push_back({x, y});
    }
  }
  if (free_cells.empty()) throw std::runtime_error("reset_random: map has no free cells");
  reset(free_cells[rng.uniform_int(static_cast<int>(free_cells.size()))]);
}

StepOutcome Environment::step(int target_node) {
  assert(graph_);
  const InformativeGraph& g = *graph_;
  const int current = g.current_index;
  if (target_node < 0 || target_node >= g.node_count()) {
    throw std::invalid_argument("step: target node out of range");
  }
  const auto& nbrs = g.adj[current];
  if (!std::binary_search(nbrs.begin(), nbrs.end(), target_node)) {
    throw std::invalid_argument("step: target is not a neighbor of the current node");
  }

  const Coord from = position();
  const Coord to = g.nodes[target_node];
  const double edge_len = distance(from, to);

  path_.push_back(to);
  raycast_update(*gt_, belief_, to, config_.sensor_range);
  rebuild_graphs();

  int newly_observed = 0;
  for (const Coord f : frontiers_) {
    uint8_t& seen = frontier_seen_[static_cast<size_t>(f.y) * gt_->width() + f.x];
    if (!seen) {
      seen = 1;
      ++newly_observed;
    }
  }

  ++steps_;
  total_distance_ += edge_len;

  StepOutcome out;
  out.path_cost = edge_len;
  out.newly_observed_frontiers = newly_observed;
  out.done = is_complete(config_.completion);
  out.reward = -edge_len * kCostScale + newly_observed * kFrontierScale +
               (out.done ? kFinishReward : 0.0);
  return out;
}

bool Environment::is_complete(CompletionMode mode) const {
  if (mode == CompletionMode::ZeroUtility) {
    assert(graph_);
    for (const double u : graph_->utility) {
      if (u > config_.utility_threshold) return false;
    }
    return true;
  }
  return coverage99_reached(belief_.count(Cell::Free), gt_->free_count());
}

double Environment::coverage() const {
  const size_t total = gt_->free_count();
  return total == 0 ? 1.0 : static_cast<double>(belief_.count(Cell::Free)) / static_cast<double>(total);
}

int Environment::gt_node_index(Coord c) const {
  const auto it = gt_index_.find(coord_key(c));
  return it == gt_index_.end() ? -1 : it->second;
}

void Environment::rebuild_graphs() {
  frontiers_ = detect_frontiers(belief_);
  CollisionGraph collision = extract_collision_graph(belief_, position(), path_,
                                                     config_.lattice_dim, config_.knn);
  auto info = std::make_shared<InformativeGraph>(
      compute_utilities(collision, belief_, frontiers_, config_.sensor_range, path_, visit_radius_));

  auto gt_graph = std::make_shared<GroundTruthGraph>();
  gt_graph->nodes = gt_nodes_;
  gt_graph->adj = gt_adj_;
  gt_graph->current_index = gt_node_index(position());
  const int n = gt_graph->node_count();
  gt_graph->explored.assign(n, 0);
  gt_graph->utility.assign(n, -1.0);

  std::unordered_map<int64_t, int> info_index;
  info_index.reserve(info->nodes.size());
  for (int i = 0; i < info->node_count(); ++i) {
    info_index.emplace(coord_key(info->nodes[i]), i);
  }
  for (int i = 0; i < n; ++i) {
    if (belief_.at(gt_graph->nodes[i]) == Cell::Unknown) continue;
    gt_graph->explored[i] = 1;
    const auto it = info_index.find(coord_key(gt_graph->nodes[i]));
    assert(it != info_index.end());
    gt_graph->utility[i] = it == info_index.end() ? 0.0 : info->utility[it->second];
  }

  graph_ = std::move(info);
  gt_graph_ = std::move(gt_graph);
}

}  // namespace explorer
