#include "explorer/rollout.hpp"

#include <cassert>

namespace explorer {

int select_action(const Matrix& probs, Rng& rng, bool argmax) {
  assert(probs.rows() == 1 && probs.cols() > 0);
  const int n = probs.cols();
  if (argmax) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (probs.data()[i] > probs.data()[best]) best = i;
    }
    return best;
  }
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs.data()[i];
    if (u < acc) return i;
  }
  return n - 1;
}

namespace {

std::vector<int> gt_action_nodes(const Environment& env, const InformativeGraph& obs,
                                 const std::vector<int>& neighbors) {
  std::vector<int> out;
  out.reserve(neighbors.size());
  for (const int nb : neighbors) {
    const int idx = env.gt_node_index(obs.nodes[nb]);
    assert(idx >= 0);
    out.push_back(idx);
  }
  return out;
}

}  // namespace

EpisodeResult collect_episode(const NetworkParams& policy, Environment& env, Rng& rng,
                              int max_steps, double utility_norm, bool argmax) {
  EpisodeResult result;
  for (int t = 0; t < max_steps; ++t) {
    auto obs = env.graph_ptr();
    auto gt = env.ground_truth_graph_ptr();
    const FeatureGraph fg = make_policy_input(*obs, utility_norm);
    if (fg.neighbors.empty()) {
      result.aborted = true;
      break;
    }
    const Matrix probs = policy_probabilities(policy, fg);
    const int action = select_action(probs, rng, argmax);

    Transition tr;
    tr.obs = obs;
    tr.gt = gt;
    tr.obs_neighbors = fg.neighbors;
    tr.gt_neighbors = gt_action_nodes(env, *obs, fg.neighbors);
    tr.action = action;

    const StepOutcome out = env.step(fg.neighbors[action]);
    tr.reward = out.reward;
    tr.done = out.done;
    tr.next_obs = env.graph_ptr();
    tr.next_gt = env.ground_truth_graph_ptr();
    tr.next_obs_neighbors = tr.next_obs->adj[tr.next_obs->current_index];
    for (const int nb : tr.next_obs_neighbors) {
      tr.next_gt_neighbors.push_back(env.gt_node_index(tr.next_obs->nodes[nb]));
    }
    if (!tr.done && tr.next_obs_neighbors.empty()) {
      // Degenerate next state: nothing to bootstrap from.
      tr.done = true;
      result.aborted = true;
    }

    result.reward_sum += out.reward;
    ++result.length;
    result.completed = out.done;
    result.transitions.push_back(std::move(tr));
    if (result.completed || result.aborted) break;
  }
  return result;
}

}  // namespace explorer
